#include "srate/segmentation.hpp"

#include "srate/error.hpp"
#include "srate/fft.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

namespace srate {

FeatureSequence::FeatureSequence(std::vector<double> data, std::size_t dim, double hop_s, double origin_s)
    : data_(std::move(data)), dim_(dim), hop_s_(hop_s), origin_s_(origin_s) {
    if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "feature dimension must be at least 1");
    if (data_.size() % dim_ != 0) throw Error(ErrorCode::InvalidArgument, "feature data is not a whole number of frames");
    if (!(hop_s_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "feature hop must be positive");
    if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
        throw Error(ErrorCode::InvalidArgument, "feature values must be finite");
    }
}

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters with unit peaks, edges equally spaced on the Mel scale from 0 to Nyquist.
std::vector<std::vector<double>> mel_filterbank(std::size_t n_mels, std::size_t n_fft, double sample_rate) {
    const std::size_t n_bins = n_fft / 2 + 1;
    const double mel_max = hz_to_mel(sample_rate / 2.0);
    std::vector<double> edges(n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(n_mels + 1)) / sample_rate *
                   static_cast<double>(n_fft);
    }
    std::vector<std::vector<double>> bank(n_mels, std::vector<double>(n_bins, 0.0));
    for (std::size_t m = 0; m < n_mels; ++m) {
        const double lo = edges[m];
        const double mid = edges[m + 1];
        const double hi = edges[m + 2];
        for (std::size_t k = 0; k < n_bins; ++k) {
            const auto bin = static_cast<double>(k);
            const double rise = (bin - lo) / (mid - lo);
            const double fall = (hi - bin) / (hi - mid);
            bank[m][k] = std::max(0.0, std::min(rise, fall));
        }
    }
    return bank;
}

}  // namespace

FeatureSequence frame_features(const AudioBuffer& buffer, const FeatureParams& params) {
    if (!(params.hop_s > 0.0) || params.frame_s < params.hop_s) {
        throw Error(ErrorCode::InvalidArgument, "features require frame_s >= hop_s > 0");
    }
    if (params.n_coeffs == 0 || params.n_coeffs >= params.n_mels) {
        throw Error(ErrorCode::InvalidArgument, "need 1 <= n_coeffs < n_mels (coefficient 0 is dropped)");
    }
    const double rate = buffer.sample_rate_hz();
    const auto frame_len = static_cast<std::size_t>(std::lround(params.frame_s * rate));
    const auto hop = static_cast<std::size_t>(std::lround(params.hop_s * rate));
    if (frame_len < 2 || hop == 0) throw Error(ErrorCode::InvalidArgument, "frame or hop shorter than one sample");
    if (buffer.size() < frame_len) {
        throw Error(ErrorCode::BufferTooShort, "buffer holds fewer samples than one analysis frame");
    }

    const std::size_t n_frames = 1 + (buffer.size() - frame_len) / hop;
    const std::size_t n_fft = next_pow2(frame_len);
    const auto window = hann_window(frame_len);
    const auto bank = mel_filterbank(params.n_mels, n_fft, rate);
    const auto samples = buffer.samples();

    std::vector<double> mel(n_frames * params.n_mels);
    std::vector<double> frame(frame_len);
    for (std::size_t t = 0; t < n_frames; ++t) {
        for (std::size_t i = 0; i < frame_len; ++i) frame[i] = samples[t * hop + i] * window[i];
        const auto mag = magnitude_spectrum(frame, n_fft);
        for (std::size_t m = 0; m < params.n_mels; ++m) {
            mel[t * params.n_mels + m] = std::inner_product(mag.begin(), mag.end(), bank[m].begin(), 0.0);
        }
    }

    // A floor tied to the loudest band keeps the log finite and makes the cepstra
    // (coefficient 0 excluded) independent of overall gain.
    const double peak = *std::max_element(mel.begin(), mel.end());
    const double floor = std::max(peak * std::pow(10.0, -params.log_floor_db / 20.0), 1e-30);
    for (auto& v : mel) v = std::log(std::max(v, floor));

    const std::size_t dim = params.n_coeffs;
    const auto n_mels = static_cast<double>(params.n_mels);
    std::vector<double> dct(dim * params.n_mels);
    for (std::size_t k = 0; k < dim; ++k) {
        for (std::size_t n = 0; n < params.n_mels; ++n) {
            dct[k * params.n_mels + n] = std::sqrt(2.0 / n_mels) *
                std::cos(std::numbers::pi * static_cast<double>(k + 1) * (static_cast<double>(n) + 0.5) / n_mels);
        }
    }
    std::vector<double> data(n_frames * dim);
    for (std::size_t t = 0; t < n_frames; ++t) {
        for (std::size_t k = 0; k < dim; ++k) {
            data[t * dim + k] = std::inner_product(mel.begin() + static_cast<std::ptrdiff_t>(t * params.n_mels),
                                                   mel.begin() + static_cast<std::ptrdiff_t>((t + 1) * params.n_mels),
                                                   dct.begin() + static_cast<std::ptrdiff_t>(k * params.n_mels), 0.0);
        }
    }

    for (std::size_t k = 0; k < dim; ++k) {
        double mean = 0.0;
        for (std::size_t t = 0; t < n_frames; ++t) mean += data[t * dim + k];
        mean /= static_cast<double>(n_frames);
        double var = 0.0;
        for (std::size_t t = 0; t < n_frames; ++t) var += (data[t * dim + k] - mean) * (data[t * dim + k] - mean);
        var /= static_cast<double>(n_frames);
        const double scale = var > 1e-24 ? 1.0 / std::sqrt(var) : 1.0;
        const double shift = params.normalization == FeatureNormalization::mean_variance ? mean : 0.0;
        for (std::size_t t = 0; t < n_frames; ++t) data[t * dim + k] = (data[t * dim + k] - shift) * scale;
    }

    const double origin = static_cast<double>(frame_len) / 2.0 / rate;
    return FeatureSequence(std::move(data), dim, static_cast<double>(hop) / rate, origin);
}

ScoreCurve dissimilarity_curve(const FeatureSequence& features) {
    const std::size_t n = features.frame_count();
    if (n < 2) throw Error(ErrorCode::TooFewFrames, "dissimilarity needs at least two frames");
    std::vector<double> norms(n);
    for (std::size_t t = 0; t < n; ++t) {
        const auto f = features.frame(t);
        norms[t] = std::sqrt(std::inner_product(f.begin(), f.end(), f.begin(), 0.0));
        if (norms[t] == 0.0) throw Error(ErrorCode::ZeroVector, "frame " + std::to_string(t) + " has zero norm");
    }
    ScoreCurve curve;
    curve.hop_s = features.hop_s();
    curve.origin_s = features.origin_s() + features.hop_s() / 2.0;
    curve.values.resize(n - 1);
    for (std::size_t t = 0; t + 1 < n; ++t) {
        const auto a = features.frame(t);
        const auto b = features.frame(t + 1);
        const double cosine = std::inner_product(a.begin(), a.end(), b.begin(), 0.0) / (norms[t] * norms[t + 1]);
        curve.values[t] = std::clamp(1.0 - cosine, 0.0, 2.0);
    }
    return curve;
}

double peak_prominence(std::span<const double> values, std::size_t peak) {
    const double height = values[peak];
    double left_base = height;
    for (std::size_t i = peak; i-- > 0;) {
        if (values[i] > height) break;
        left_base = std::min(left_base, values[i]);
    }
    double right_base = height;
    for (std::size_t i = peak + 1; i < values.size(); ++i) {
        if (values[i] > height) break;
        right_base = std::min(right_base, values[i]);
    }
    return height - std::max(left_base, right_base);
}

BoundaryList detect_boundaries(const ScoreCurve& curve, double prominence, double min_separation_s) {
    if (prominence < 0.0 || min_separation_s < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "prominence and separation must be non-negative");
    }
    const auto& v = curve.values;

    // Interior local maxima; a flat top counts once, at its middle sample.
    std::vector<std::size_t> peaks;
    std::size_t i = 1;
    while (i + 1 < v.size()) {
        if (v[i] > v[i - 1]) {
            std::size_t j = i;
            while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
            if (j + 1 < v.size() && v[j + 1] < v[i]) {
                const std::size_t mid = (i + j) / 2;
                if (peak_prominence(v, mid) >= prominence) peaks.push_back(mid);
            }
            i = j + 1;
        } else {
            ++i;
        }
    }

    std::vector<std::size_t> order(peaks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[peaks[a]] > v[peaks[b]]; });
    std::vector<std::size_t> kept;
    for (const auto idx : order) {
        const auto p = peaks[idx];
        const bool crowded = std::any_of(kept.begin(), kept.end(), [&](std::size_t q) {
            const auto gap = static_cast<double>(p > q ? p - q : q - p) * curve.hop_s;
            return gap < min_separation_s;
        });
        if (!crowded) kept.push_back(p);
    }
    std::sort(kept.begin(), kept.end());

    BoundaryList out;
    for (const auto p : kept) out.times_s.push_back(std::max(0.0, curve.time_at(p)));
    return out;
}

BoundaryList segment_unsupervised(const AudioBuffer& buffer, const SegmentationParams& params) {
    std::size_t begin = 0;
    std::size_t end = buffer.size();
    if (params.use_vad) {
        const auto regions = detect_speech(buffer, params.vad);
        if (regions.empty()) return {};
        const double rate = buffer.sample_rate_hz();
        begin = static_cast<std::size_t>(std::floor(regions.front().start_s * rate));
        end = std::min(buffer.size(), static_cast<std::size_t>(std::ceil(regions.back().end_s * rate)));
    }
    const auto span = buffer.slice(begin, end);
    const auto features = frame_features(span, params.features);
    auto curve = dissimilarity_curve(features);
    curve.origin_s += static_cast<double>(begin) / buffer.sample_rate_hz();

    const double peak = curve.values.empty() ? 0.0 : *std::max_element(curve.values.begin(), curve.values.end());
    const double threshold = std::max(params.min_prominence, params.relative_prominence * peak);
    return detect_boundaries(curve, threshold, params.min_separation_s);
}

std::size_t count_phonemes_unsupervised(const AudioBuffer& buffer, const SegmentationParams& params) {
    return segment_unsupervised(buffer, params).times_s.size();
}

std::size_t count_boundary_matches(std::span<const double> predicted, std::span<const double> reference,
                                   double tolerance_s) {
    std::vector<double> pred(predicted.begin(), predicted.end());
    std::vector<double> ref(reference.begin(), reference.end());
    std::sort(pred.begin(), pred.end());
    std::sort(ref.begin(), ref.end());
    // Absorbs decimal round-off such as |0.03 - 0.01| > 0.02.
    const double tol = tolerance_s + 1e-9;

    std::size_t matches = 0;
    std::size_t next = 0;  // predictions before `next` are matched or too early for every later reference
    for (const double r : ref) {
        while (next < pred.size() && pred[next] < r - tol) ++next;
        if (next < pred.size() && pred[next] <= r + tol) {
            ++matches;
            ++next;
        }
    }
    return matches;
}

BoundaryMetrics boundary_metrics(const BoundaryList& predicted, const BoundaryList& reference, double tolerance_s) {
    if (tolerance_s < 0.0) throw Error(ErrorCode::InvalidArgument, "tolerance must be non-negative");
    BoundaryMetrics m;
    m.tolerance_s = tolerance_s;
    m.predicted = predicted.times_s.size();
    m.reference = reference.times_s.size();

    if (m.predicted == 0 && m.reference == 0) {
        m.precision = m.recall = m.f1 = m.r_value = 1.0;
        return m;
    }
    if (m.predicted == 0 || m.reference == 0) return m;

    m.matches = count_boundary_matches(predicted.times_s, reference.times_s, tolerance_s);
    const auto hits = static_cast<double>(m.matches);
    m.precision = hits / static_cast<double>(m.predicted);
    m.recall = hits / static_cast<double>(m.reference);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;

    // R/P - 1 written as |pred|/|ref| - 1 so it stays defined when nothing matches.
    const double over_segmentation = static_cast<double>(m.predicted) / static_cast<double>(m.reference) - 1.0;
    const double r1 = std::sqrt((1.0 - m.recall) * (1.0 - m.recall) + over_segmentation * over_segmentation);
    const double r2 = (-over_segmentation + m.recall - 1.0) / std::numbers::sqrt2;
    m.r_value = 1.0 - (std::abs(r1) + std::abs(r2)) / 2.0;
    return m;
}

FeatureSequence read_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto u32 = [&](std::size_t off) {
        return static_cast<std::uint32_t>(bytes[off]) | (static_cast<std::uint32_t>(bytes[off + 1]) << 8) |
               (static_cast<std::uint32_t>(bytes[off + 2]) << 16) | (static_cast<std::uint32_t>(bytes[off + 3]) << 24);
    };
    if (bytes.size() < 12) throw Error(ErrorCode::CorruptFile, "feature file header truncated");
    const std::size_t frames = u32(0);
    const std::size_t dim = u32(4);
    const std::uint32_t hop_us = u32(8);
    if (dim == 0 || hop_us == 0) throw Error(ErrorCode::CorruptFile, "feature header has zero dimension or hop");
    if (bytes.size() != 12 + frames * dim * 4) throw Error(ErrorCode::CorruptFile, "feature payload size mismatch");
    std::vector<double> data(frames * dim);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::bit_cast<float>(u32(12 + 4 * i));
    return FeatureSequence(std::move(data), dim, hop_us * 1e-6, 0.0);
}

void write_features(const FeatureSequence& features, const std::filesystem::path& path) {
    std::vector<char> out;
    auto put = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    put(static_cast<std::uint32_t>(features.frame_count()));
    put(static_cast<std::uint32_t>(features.dim()));
    put(static_cast<std::uint32_t>(std::lround(features.hop_s() * 1e6)));
    for (const double v : features.data()) put(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace srate
