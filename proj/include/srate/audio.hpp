#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace srate {

/// Mono waveform. Samples are finite; nominal range is [-1, 1].
class AudioBuffer {
public:
    AudioBuffer() = default;
    AudioBuffer(std::vector<float> samples, int sample_rate_hz);

    std::span<const float> samples() const noexcept { return samples_; }
    int sample_rate_hz() const noexcept { return sample_rate_hz_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    double duration_s() const noexcept {
        return sample_rate_hz_ > 0 ? static_cast<double>(samples_.size()) / sample_rate_hz_ : 0.0;
    }

    /// Copy of the samples in [begin, end), clamped to the buffer.
    AudioBuffer slice(std::size_t begin, std::size_t end) const;

private:
    std::vector<float> samples_;
    int sample_rate_hz_ = 16000;
};

struct SpeechRegion {
    double start_s = 0.0;
    double end_s = 0.0;

    double length_s() const noexcept { return end_s - start_s; }
    friend bool operator==(const SpeechRegion&, const SpeechRegion&) = default;
};

enum class WindowKind { hann };

struct WindowVector {
    std::vector<double> coefficients;
    WindowKind kind = WindowKind::hann;

    std::size_t size() const noexcept { return coefficients.size(); }
    double operator[](std::size_t i) const noexcept { return coefficients[i]; }
};

enum class SampleFormat { pcm16, float32 };

AudioBuffer read_wav(const std::filesystem::path& path);
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               SampleFormat format = SampleFormat::pcm16);

/// Symmetric Hann window: w(m) = 0.5 - 0.5 cos(2 pi m / (size - 1)); size 1 gives [1].
WindowVector hann_window(std::size_t size);

struct VadParams {
    double frame_s = 0.025;
    double hop_s = 0.010;
    double threshold_db = -40.0;  // relative to the loudest frame
    double min_region_s = 0.100;
};

/// Frame-energy voice activity detection.
///
/// A frame is speech when its mean-square energy exceeds the loudest frame's energy
/// scaled by threshold_db. A run of speech frames i..j becomes one region. Its onset
/// is placed mid-way through the hop of frame i that frame i-1 did not cover, and its
/// offset mid-way through the first hop of frame j; runs touching the first or last
/// frame extend to the buffer edge. Regions shorter than min_region_s are dropped.
std::vector<SpeechRegion> detect_speech(const AudioBuffer& buffer, const VadParams& params = {});

double speech_duration(std::span<const SpeechRegion> regions) noexcept;

}  // namespace srate
