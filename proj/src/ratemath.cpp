#include "srate/ratemath.hpp"

#include "srate/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace srate {

namespace {

// Snap tolerance, in grid steps, when deciding whether a boundary lands on a grid point.
constexpr double kGridSnap = 1e-9;

std::size_t first_index_at_or_after(double t, double step) {
    return static_cast<std::size_t>(std::max(0.0, std::ceil(t / step - kGridSnap)));
}

}  // namespace

RateCurve::RateCurve(std::vector<double> values, double grid_step_s, double origin_s)
    : values_(std::move(values)), grid_step_s_(grid_step_s), origin_s_(origin_s) {
    if (!(grid_step_s_ > 0.0) || !std::isfinite(grid_step_s_)) {
        throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
    }
    if (!std::isfinite(origin_s_)) throw Error(ErrorCode::InvalidArgument, "curve origin must be finite");
    for (const double v : values_) {
        if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::InvalidArgument, "rate values must be finite and >= 0");
    }
}

RateCurve instantaneous_rate(const PhonemeAlignment& alignment, double grid_step_s) {
    if (!(grid_step_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
    if (phoneme_count(alignment) == 0) throw Error(ErrorCode::EmptyAlignment, "no phonemes to build a rate curve from");

    const double end = alignment.segments().back().end_s;
    std::vector<double> values(first_index_at_or_after(end, grid_step_s), 0.0);
    for (const auto& seg : alignment.segments()) {
        if (alignment.is_silence(seg)) continue;
        const double height = 1.0 / seg.duration_s();
        const auto lo = first_index_at_or_after(seg.start_s, grid_step_s);
        const auto hi = std::min(values.size(), first_index_at_or_after(seg.end_s, grid_step_s));
        for (std::size_t n = lo; n < hi; ++n) values[n] = height;
    }
    return RateCurve(std::move(values), grid_step_s, 0.0);
}

double analytic_integral(const PhonemeAlignment& alignment) noexcept {
    double total = 0.0;
    for (const auto& seg : alignment.segments()) {
        if (alignment.is_silence(seg)) continue;
        const double width = seg.duration_s();
        total += width * (1.0 / width);
    }
    return total;
}

double grid_integral(const RateCurve& curve) noexcept {
    const auto v = curve.values();
    return curve.grid_step_s() * std::accumulate(v.begin(), v.end(), 0.0);
}

std::size_t smoothing_kernel_size(double window_s, double grid_step_s) {
    if (!(window_s > 0.0) || !(grid_step_s > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "window and grid step must be positive");
    }
    auto k = static_cast<std::size_t>(std::max(1L, std::lround(window_s / grid_step_s)));
    if (k % 2 == 0) ++k;
    return k;
}

RateCurve local_rate(const RateCurve& curve, double window_s) {
    if (curve.empty()) throw Error(ErrorCode::EmptyCurve, "cannot smooth an empty curve");
    const auto kernel_size = smoothing_kernel_size(window_s, curve.grid_step_s());
    const auto window = hann_window(kernel_size);
    const double norm = std::accumulate(window.coefficients.begin(), window.coefficients.end(), 0.0);

    const auto in = curve.values();
    const auto n_points = static_cast<std::ptrdiff_t>(in.size());
    const auto half = static_cast<std::ptrdiff_t>((kernel_size - 1) / 2);
    std::vector<double> out(in.size(), 0.0);
    for (std::ptrdiff_t n = 0; n < n_points; ++n) {
        double acc = 0.0;
        for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(kernel_size); ++m) {
            const std::ptrdiff_t idx = n + m - half;
            if (idx < 0 || idx >= n_points) continue;
            acc += in[static_cast<std::size_t>(idx)] * window[static_cast<std::size_t>(m)];
        }
        out[static_cast<std::size_t>(n)] = acc / norm;
    }
    return RateCurve(std::move(out), curve.grid_step_s(), curve.origin_s());
}

double interpolation_factor(double source_rate, double target_rate) {
    if (!std::isfinite(source_rate) || !std::isfinite(target_rate) || source_rate < kMinimumRate ||
        target_rate < kMinimumRate) {
        throw Error(ErrorCode::NonPositiveRate, "phoneme rates must be positive");
    }
    return target_rate / source_rate;
}

RateErrorReport rate_errors(double predicted_count, std::size_t true_count) {
    if (true_count == 0) throw Error(ErrorCode::InvalidArgument, "true phoneme count must be at least 1");
    RateErrorReport report;
    report.e_cp = std::abs(predicted_count - static_cast<double>(true_count));
    report.rel_error = report.e_cp / static_cast<double>(true_count);
    return report;
}

double pearson_r(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw Error(ErrorCode::LengthMismatch, "pearson_r needs two sequences of equal length >= 2");
    }
    const auto n = static_cast<double>(a.size());
    const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double cov = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0) throw Error(ErrorCode::ZeroVariance, "pearson_r of a constant sequence");
    return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

double pearson_r(const RateCurve& a, const RateCurve& b) { return pearson_r(a.values(), b.values()); }

RateErrorReport evaluate_rate_prediction(const RateCurve& predicted, const PhonemeAlignment& alignment,
                                         double window_s) {
    const auto reference = local_rate(instantaneous_rate(alignment, predicted.grid_step_s()), window_s);
    if (reference.size() != predicted.size()) {
        throw Error(ErrorCode::LengthMismatch, "predicted curve has " + std::to_string(predicted.size()) +
                                                   " points, reference has " + std::to_string(reference.size()));
    }
    auto report = rate_errors(grid_integral(predicted), phoneme_count(alignment));
    report.pearson_r = pearson_r(predicted, reference);
    return report;
}

RateCurve read_rate_curve(const std::filesystem::path& path, double grid_step_s) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<double> times;
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::vector<double> nums;
        std::string tok;
        while (fields >> tok) {
            if (tok.front() == '#') break;
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || ptr != tok.data() + tok.size()) {
                throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": bad number");
            }
            nums.push_back(v);
        }
        if (nums.empty()) continue;
        if (nums.size() == 1) {
            values.push_back(nums[0]);
        } else if (nums.size() == 2) {
            times.push_back(nums[0]);
            values.push_back(nums[1]);
        } else {
            throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": expected 1 or 2 columns");
        }
    }
    double origin = 0.0;
    if (!times.empty()) {
        if (times.size() != values.size()) {
            throw Error(ErrorCode::ParseError, path.string() + ": mixed one- and two-column rows");
        }
        origin = times.front();
        if (times.size() >= 2) grid_step_s = times[1] - times[0];
    }
    return RateCurve(std::move(values), grid_step_s, origin);
}

void write_rate_curve(const RateCurve& curve, std::ostream& out) {
    const auto saved = out.precision(12);
    for (std::size_t n = 0; n < curve.size(); ++n) out << curve.time_at(n) << '\t' << curve[n] << '\n';
    out.precision(saved);
}

}  // namespace srate
