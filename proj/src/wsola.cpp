#include "srate/wsola.hpp"

#include "srate/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace srate {

StretchParams StretchParams::for_sample_rate(int sample_rate_hz, double frame_s, double tolerance_s) {
    if (sample_rate_hz <= 0 || !(frame_s > 0.0) || tolerance_s < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "invalid WSOLA timing parameters");
    }
    StretchParams p;
    const auto half = std::max<long>(1, std::lround(frame_s * sample_rate_hz / 2.0));
    p.frame_len = static_cast<std::size_t>(2 * half);
    p.synthesis_hop = p.frame_len / 2;
    p.tolerance = static_cast<std::size_t>(std::lround(tolerance_s * sample_rate_hz));
    p.window = hann_window(p.frame_len);
    return p;
}

void StretchParams::validate() const {
    if (frame_len == 0 || frame_len % 2 != 0) throw Error(ErrorCode::InvalidArgument, "frame length must be even and positive");
    if (synthesis_hop == 0 || synthesis_hop > frame_len) {
        throw Error(ErrorCode::InvalidArgument, "synthesis hop must be in (0, frame_len]");
    }
    if (window.size() != frame_len) throw Error(ErrorCode::InvalidArgument, "window length must equal frame length");
}

int best_offset(std::span<const float> reference, std::span<const float> candidate_region, std::size_t tolerance) {
    if (candidate_region.size() < reference.size() + 2 * tolerance) {
        throw Error(ErrorCode::RegionTooShort, "candidate region does not cover every offset");
    }
    double ref_energy = 0.0;
    for (const float r : reference) ref_energy += static_cast<double>(r) * r;

    auto score = [&](long offset) {
        const auto start = static_cast<std::size_t>(static_cast<long>(tolerance) + offset);
        double dot = 0.0;
        double energy = 0.0;
        for (std::size_t i = 0; i < reference.size(); ++i) {
            const double c = candidate_region[start + i];
            dot += reference[i] * c;
            energy += c * c;
        }
        if (ref_energy <= 0.0 || energy <= 0.0) return 0.0;
        return dot / std::sqrt(ref_energy * energy);
    };

    long best = 0;
    double best_score = score(0);
    const auto tol = static_cast<long>(tolerance);
    for (long d = 1; d <= tol; ++d) {
        for (const long offset : {-d, d}) {
            const double s = score(offset);
            if (s > best_score) {
                best_score = s;
                best = offset;
            }
        }
    }
    return static_cast<int>(best);
}

namespace {

// Copies x[start, start + len) into `out`, reading zeros outside the signal.
void read_padded(std::span<const float> x, long start, std::vector<float>& out) {
    const auto n = static_cast<long>(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const long idx = start + static_cast<long>(i);
        out[i] = idx >= 0 && idx < n ? x[static_cast<std::size_t>(idx)] : 0.0f;
    }
}

}  // namespace

StretchResult time_stretch(const AudioBuffer& input, double alpha, const StretchParams& params) {
    if (!(alpha >= kMinAlpha && alpha <= kMaxAlpha)) {
        throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in [0.25, 4]");
    }
    params.validate();
    if (input.size() < 2 * params.frame_len) {
        throw Error(ErrorCode::InputTooShort, "input must hold at least two frames");
    }

    const auto x = input.samples();
    const auto frame_len = static_cast<long>(params.frame_len);
    const auto hop = static_cast<long>(params.synthesis_hop);
    const auto tol = static_cast<long>(params.tolerance);
    const long half = frame_len / 2;
    const auto out_len = static_cast<long>(std::lround(static_cast<double>(x.size()) / alpha));

    std::vector<double> acc(static_cast<std::size_t>(out_len), 0.0);
    std::vector<double> weight(static_cast<std::size_t>(out_len), 0.0);
    std::vector<float> frame(params.frame_len);
    std::vector<float> continuation(params.frame_len);
    std::vector<float> region(params.frame_len + 2 * params.tolerance);

    long prev_start = 0;
    for (long k = 0; k * hop - half < out_len; ++k) {
        const long synth_start = k * hop - half;
        long analysis_start = std::lround(alpha * static_cast<double>(k * hop)) - half;
        if (k > 0 && tol > 0) {
            read_padded(x, prev_start + hop, continuation);
            read_padded(x, analysis_start - tol, region);
            analysis_start += best_offset(continuation, region, params.tolerance);
        }
        prev_start = analysis_start;

        read_padded(x, analysis_start, frame);
        for (long i = 0; i < frame_len; ++i) {
            const long pos = synth_start + i;
            if (pos < 0 || pos >= out_len) continue;
            const double w = params.window[static_cast<std::size_t>(i)];
            acc[static_cast<std::size_t>(pos)] += w * frame[static_cast<std::size_t>(i)];
            weight[static_cast<std::size_t>(pos)] += w;
        }
    }

    std::vector<float> out(static_cast<std::size_t>(out_len));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(acc[i] / std::max(weight[i], 1e-6));

    StretchResult result{AudioBuffer(std::move(out), input.sample_rate_hz()), 0.0};
    result.achieved_ratio = out_len > 0 ? static_cast<double>(x.size()) / static_cast<double>(out_len) : 0.0;
    return result;
}

}  // namespace srate
