#include "srate/error.hpp"
#include "srate/ratemath.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

using namespace srate;
using namespace srate::testing;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected srate::Error");
    return ErrorCode::InvalidArgument;
}

PhonemeAlignment three_phonemes() { return PhonemeAlignment({{0.0, 0.1, "A"}, {0.1, 0.3, "B"}, {0.3, 0.4, "C"}}); }

// Straight transcription of the smoothing sum, with its own kernel.
std::vector<double> naive_local_rate(const std::vector<double>& x, std::size_t k) {
    std::vector<double> w(k, 1.0);
    if (k > 1) {
        for (std::size_t m = 0; m < k; ++m) w[m] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * m / (k - 1.0));
    }
    double wsum = 0.0;
    for (double v : w) wsum += v;
    const auto half = static_cast<long>((k - 1) / 2);
    std::vector<double> out(x.size());
    for (long n = 0; n < static_cast<long>(x.size()); ++n) {
        double acc = 0.0;
        for (long m = 0; m < static_cast<long>(k); ++m) {
            const long idx = n + m - half;
            if (idx >= 0 && idx < static_cast<long>(x.size())) acc += x[idx] * w[m];
        }
        out[n] = acc / wsum;
    }
    return out;
}

}  // namespace

TEST_CASE("instantaneous_rate") {
    SUBCASE("single phoneme") {
        const auto c = instantaneous_rate(PhonemeAlignment({{0.0, 0.1, "A"}}), 0.01);
        REQUIRE(c.size() == 10);
        for (std::size_t n = 0; n < 10; ++n) CHECK(c[n] == doctest::Approx(10.0).epsilon(1e-12));
        CHECK(c.origin_s() == 0.0);
    }

    SUBCASE("steps follow inverse duration") {
        const auto c = instantaneous_rate(PhonemeAlignment({{0.0, 0.1, "A"}, {0.1, 0.3, "B"}}), 0.01);
        REQUIRE(c.size() == 30);
        for (std::size_t n = 0; n < 10; ++n) CHECK(c[n] == doctest::Approx(10.0));
        for (std::size_t n = 10; n < 30; ++n) CHECK(c[n] == doctest::Approx(5.0));
    }

    SUBCASE("silence gap reads zero") {
        const auto c = instantaneous_rate(PhonemeAlignment({{0.0, 0.1, "A"}, {0.1, 0.4, "sil"}, {0.4, 0.5, "B"}}), 0.01);
        REQUIRE(c.size() == 50);
        for (std::size_t n = 10; n < 40; ++n) CHECK(c[n] == 0.0);
        CHECK(c[40] == doctest::Approx(10.0));
    }

    SUBCASE("errors") {
        CHECK(code_of([] { instantaneous_rate(PhonemeAlignment({{0.0, 0.5, "sil"}})); }) == ErrorCode::EmptyAlignment);
        CHECK(code_of([] { instantaneous_rate(three_phonemes(), 0.0); }) == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("analytic_integral") {
    CHECK(analytic_integral(PhonemeAlignment({{0.0, 0.013, "A"}, {0.013, 0.2, "B"}, {0.3, 0.31, "C"}, {0.31, 0.9, "D"},
                                              {1.0, 1.37, "E"}})) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(analytic_integral(PhonemeAlignment{}) == 0.0);

    std::mt19937 gen(1);
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_alignment(gen);
        const double count = static_cast<double>(phoneme_count(a));
        REQUIRE(std::abs(analytic_integral(a) - count) / count < 1e-12);
    }
}

TEST_CASE("grid_integral") {
    CHECK(grid_integral(RateCurve(std::vector<double>(100, 10.0), 0.01)) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(grid_integral(RateCurve(std::vector<double>(37, 0.0), 0.01)) == 0.0);

    const auto a = read_alignment(data_dir() / "fixture_55.tsv");
    CHECK(std::abs(grid_integral(instantaneous_rate(a, 0.001)) - 55.0) <= 0.02 * 55.0);
}

TEST_CASE("grid refinement converges to the phoneme count") {
    std::mt19937 gen(8);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_alignment(gen);
        const double count = static_cast<double>(phoneme_count(a));
        double max_rate = 0.0;
        for (const auto& s : a.segments()) {
            if (!a.is_silence(s)) max_rate = std::max(max_rate, 1.0 / s.duration_s());
        }
        const double edges = 2.0 * count;
        for (const double h : {0.01, 0.001, 0.0001}) {
            const double err = std::abs(grid_integral(instantaneous_rate(a, h)) - count);
            CHECK(err <= 2.0 * h * edges * max_rate + 1e-9);
            if (h == 0.001) CHECK(err <= 0.02 * count);
        }
    }
}

TEST_CASE("smoothing_kernel_size") {
    CHECK(smoothing_kernel_size(0.625, 0.01) == 63);
    CHECK(smoothing_kernel_size(0.05, 0.01) == 5);
    CHECK(smoothing_kernel_size(0.04, 0.01) == 5);
    CHECK(smoothing_kernel_size(0.01, 0.01) == 1);
    CHECK(smoothing_kernel_size(0.001, 0.01) == 1);
}

TEST_CASE("local_rate") {
    SUBCASE("single-tap kernel is the identity") {
        std::mt19937 gen(2);
        std::uniform_real_distribution<double> v(0.0, 30.0);
        std::vector<double> values(257);
        for (auto& x : values) x = v(gen);
        const RateCurve in(values, 0.01, 0.25);
        const auto out = local_rate(in, 0.01);
        CHECK(out == in);
    }

    SUBCASE("constant input stays flat away from the edges") {
        const RateCurve in(std::vector<double>(200, 10.0), 0.01);
        const auto out = local_rate(in, 0.625);
        const std::size_t half = 31;
        for (std::size_t n = half; n + half < out.size(); ++n) CHECK(std::abs(out[n] - 10.0) <= 1e-9);
        for (std::size_t n = 0; n + 1 < half; ++n) {
            CHECK(out[n] < 10.0);
            CHECK(out[out.size() - 1 - n] < 10.0);
        }
    }

    SUBCASE("three-phoneme fixture, 50 ms window") {
        const auto out = local_rate(instantaneous_rate(three_phonemes(), 0.01), 0.05);
        REQUIRE(out.size() == 40);
        CHECK(out[0] == doctest::Approx(7.5).epsilon(1e-12));
        CHECK(out[10] == doctest::Approx(6.25).epsilon(1e-12));
        CHECK(out[20] == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(out[29] == doctest::Approx(6.25).epsilon(1e-12));
        CHECK(out[30] == doctest::Approx(8.75).epsilon(1e-12));
        CHECK(out[39] == doctest::Approx(7.5).epsilon(1e-12));
    }

    SUBCASE("three-phoneme fixture, 250 ms window") {
        const auto out = local_rate(instantaneous_rate(three_phonemes(), 0.01), 0.25);
        CHECK(std::abs(out[0] - 5.381656506265315) <= 1e-9);
        CHECK(std::abs(out[10] - 7.277469094287112) <= 1e-9);
        CHECK(std::abs(out[20] - 5.042108946591131) <= 1e-9);
        CHECK(std::abs(out[30] - 7.638313012530628) <= 1e-9);
    }

    SUBCASE("agrees with a direct evaluation of the sum") {
        std::mt19937 gen(4);
        for (int trial = 0; trial < 50; ++trial) {
            const auto curve = instantaneous_rate(random_alignment(gen), 0.01);
            const std::vector<double> x(curve.values().begin(), curve.values().end());
            for (const double window : {0.03, 0.2, 0.625, 1.5}) {
                const auto expected = naive_local_rate(x, smoothing_kernel_size(window, 0.01));
                const auto got = local_rate(curve, window);
                REQUIRE(got.size() == expected.size());
                for (std::size_t n = 0; n < x.size(); ++n) REQUIRE(got[n] == doctest::Approx(expected[n]).epsilon(1e-12));
            }
        }
    }

    SUBCASE("mass is conserved with enough zero padding") {
        std::mt19937 gen(6);
        for (int trial = 0; trial < 100; ++trial) {
            const auto inst = instantaneous_rate(random_alignment(gen), 0.01);
            std::vector<double> padded(40, 0.0);
            padded.insert(padded.end(), inst.values().begin(), inst.values().end());
            padded.insert(padded.end(), 40, 0.0);
            const RateCurve c(padded, 0.01);
            const auto smooth = local_rate(c, 0.625);
            CHECK(std::abs(grid_integral(smooth) - grid_integral(c)) <= 1e-9 * grid_integral(c));
            const double hi = *std::max_element(padded.begin(), padded.end());
            for (double v : smooth.values()) {
                CHECK(v >= 0.0);
                CHECK(v <= hi * (1 + 1e-12));
            }
        }
    }

    SUBCASE("errors") {
        CHECK(code_of([] { local_rate(RateCurve{}); }) == ErrorCode::EmptyCurve);
        CHECK(code_of([] { local_rate(RateCurve({1.0}, 0.01), 0.0); }) == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("interpolation_factor") {
    CHECK(interpolation_factor(12.0, 12.0) == 1.0);
    CHECK(interpolation_factor(10.0, 12.5) == 1.25);
    CHECK(interpolation_factor(9.0, 14.0) > 1.0);
    CHECK(code_of([] { interpolation_factor(0.0, 10.0); }) == ErrorCode::NonPositiveRate);
    CHECK(code_of([] { interpolation_factor(10.0, -1.0); }) == ErrorCode::NonPositiveRate);
    CHECK(code_of([] { interpolation_factor(1e-7, 10.0); }) == ErrorCode::NonPositiveRate);

    // The product of reciprocal factors is 1 exactly for power-of-two ratios and within one ulp otherwise.
    std::mt19937 gen(9);
    std::uniform_real_distribution<double> r(3.0, 25.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = r(gen);
        const double b = r(gen);
        CHECK(interpolation_factor(a, a) == 1.0);
        CHECK(interpolation_factor(a, b) * interpolation_factor(b, a) == doctest::Approx(1.0).epsilon(4e-16));
    }
}

TEST_CASE("rate_errors") {
    const auto r = rate_errors(52.0, 50);
    CHECK(r.e_cp == 2.0);
    CHECK(r.rel_error == doctest::Approx(0.04));
    CHECK_FALSE(r.pearson_r.has_value());
    CHECK(rate_errors(50.0, 50) == RateErrorReport{});
    CHECK(code_of([] { rate_errors(3.0, 0); }) == ErrorCode::InvalidArgument);

    // e_cp and rel_error stand in the ratio of the mean count: 2.29 / 0.0414 ~ 55.3.
    const auto table = rate_errors(55.3 + 2.29, 55);
    CHECK(table.e_cp / table.rel_error == doctest::Approx(55.0));
    CHECK(2.29 / 0.0414 == doctest::Approx(55.3).epsilon(0.001));
}

TEST_CASE("pearson_r") {
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{1, 2, 3, 5};
    CHECK(pearson_r(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(pearson_r(a, b) - 0.9827076298239908) <= 1e-12);

    const std::vector<double> neg{9, 8, 7, 6};
    CHECK(pearson_r(a, neg) == doctest::Approx(-1.0).epsilon(1e-15));

    CHECK(code_of([&] { pearson_r(a, std::vector<double>{1, 2, 3}); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([&] { pearson_r(a, std::vector<double>{2, 2, 2, 2}); }) == ErrorCode::ZeroVariance);
    CHECK(code_of([] { pearson_r(std::vector<double>{1}, std::vector<double>{1}); }) == ErrorCode::LengthMismatch);

    std::mt19937 gen(10);
    std::uniform_real_distribution<double> v(0.0, 20.0);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(50), y(50);
        for (std::size_t i = 0; i < 50; ++i) {
            x[i] = v(gen);
            y[i] = 0.5 * x[i] + v(gen);
        }
        const double r = pearson_r(x, y);
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);
        const double s = scale(gen);
        const double off = v(gen);
        std::vector<double> y2(y);
        for (auto& e : y2) e = s * e + off;
        CHECK(std::abs(pearson_r(x, y2) - r) <= 1e-9);
        CHECK(std::abs(pearson_r(y2, x) - r) <= 1e-9);
    }
}

TEST_CASE("evaluate_rate_prediction") {
    const auto al = read_alignment(data_dir() / "fixture_55.tsv");
    const auto reference = local_rate(instantaneous_rate(al, 0.01), 0.625);
    const auto perfect = evaluate_rate_prediction(reference, al);
    REQUIRE(perfect.pearson_r.has_value());
    CHECK(*perfect.pearson_r == doctest::Approx(1.0));
    CHECK(perfect.e_cp < 0.02 * 55);

    std::vector<double> inflated(reference.values().begin(), reference.values().end());
    for (auto& v : inflated) v *= 1.1;
    const auto over = evaluate_rate_prediction(RateCurve(inflated, 0.01), al);
    CHECK(*over.pearson_r == doctest::Approx(1.0));
    CHECK(over.rel_error == doctest::Approx(0.1).epsilon(0.03));

    CHECK(code_of([&] { evaluate_rate_prediction(RateCurve({1.0, 2.0}, 0.01), al); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("rate curve text round trip") {
    const auto curve = local_rate(instantaneous_rate(three_phonemes(), 0.01), 0.05);
    std::ostringstream text;
    write_rate_curve(curve, text);
    const auto dir = scratch_dir("ratemath_io");
    std::ofstream(dir / "curve.tsv") << text.str();
    const auto back = read_rate_curve(dir / "curve.tsv", 0.02);
    REQUIRE(back.size() == curve.size());
    CHECK(back.grid_step_s() == doctest::Approx(0.01));
    for (std::size_t n = 0; n < curve.size(); ++n) CHECK(back[n] == doctest::Approx(curve[n]).epsilon(1e-9));

    std::ofstream(dir / "bare.txt") << "1\n2\n3\n";
    const auto bare = read_rate_curve(dir / "bare.txt", 0.02);
    CHECK(bare.size() == 3);
    CHECK(bare.grid_step_s() == 0.02);
}

TEST_CASE("RateCurve rejects invalid values") {
    CHECK(code_of([] { RateCurve({1.0, -0.5}, 0.01); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { RateCurve({1.0, std::numeric_limits<double>::infinity()}, 0.01); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { RateCurve({1.0}, 0.0); }) == ErrorCode::InvalidArgument);
}
