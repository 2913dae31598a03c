#pragma once

#include "srate/audio.hpp"

#include <cstddef>
#include <span>

namespace srate {

struct StretchParams {
    std::size_t frame_len = 400;      // samples, even
    std::size_t synthesis_hop = 200;  // samples
    std::size_t tolerance = 120;      // search radius each side, samples
    WindowVector window = hann_window(400);

    /// Defaults at a sample rate: 25 ms frame rounded to even, half-frame hop, 7.5 ms tolerance.
    static StretchParams for_sample_rate(int sample_rate_hz, double frame_s = 0.025, double tolerance_s = 0.0075);

    /// Throws InvalidArgument unless 0 < hop <= frame_len, frame_len even, window length = frame_len.
    void validate() const;
};

struct StretchResult {
    AudioBuffer audio;
    double achieved_ratio = 1.0;  // input length / output length
};

inline constexpr double kMinAlpha = 0.25;
inline constexpr double kMaxAlpha = 4.0;

/// Waveform-similarity overlap-add tempo change; alpha > 1 shortens the signal.
///
/// Synthesis frames are centered at k * synthesis_hop. Analysis frame k starts near
/// alpha times that position, shifted within +-tolerance to best match the natural
/// continuation of analysis frame k-1. Frames are windowed, overlap-added and divided
/// by the summed window. Output length is round(N / alpha).
StretchResult time_stretch(const AudioBuffer& input, double alpha, const StretchParams& params);

/// Offset in [-tolerance, tolerance] whose slice candidate[tolerance + offset, + reference.size())
/// has the largest normalized cross-correlation with `reference`. Zero-energy slices score 0;
/// ties prefer 0, then the smaller magnitude, then the negative side.
int best_offset(std::span<const float> reference, std::span<const float> candidate_region, std::size_t tolerance);

}  // namespace srate
