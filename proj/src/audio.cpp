#include "srate/audio.hpp"

#include "srate/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

namespace srate {

AudioBuffer::AudioBuffer(std::vector<float> samples, int sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
    if (sample_rate_hz_ <= 0) {
        throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
    }
    if (!std::all_of(samples_.begin(), samples_.end(), [](float s) { return std::isfinite(s); })) {
        throw Error(ErrorCode::InvalidArgument, "audio samples must be finite");
    }
}

AudioBuffer AudioBuffer::slice(std::size_t begin, std::size_t end) const {
    end = std::min(end, samples_.size());
    begin = std::min(begin, end);
    return AudioBuffer(std::vector<float>(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                          samples_.begin() + static_cast<std::ptrdiff_t>(end)),
                       sample_rate_hz_);
}

// ---------------------------------------------------------------------------
// WAV I/O

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct FormatChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits_per_sample = 0;
};

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                           std::istreambuf_iterator<char>());

    if (bytes.size() < 12) throw Error(ErrorCode::CorruptFile, "file too short for a RIFF header");
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw Error(ErrorCode::UnsupportedFormat, "not a RIFF/WAVE file");
    }

    FormatChunk fmt;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::uint32_t size = read_u32(chunk + 4);
        const std::size_t body = pos + 8;
        if (body + size > bytes.size()) {
            throw Error(ErrorCode::CorruptFile, "truncated chunk in " + path.string());
        }
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16) throw Error(ErrorCode::CorruptFile, "fmt chunk too short");
            fmt.format = read_u16(chunk + 8);
            fmt.channels = read_u16(chunk + 10);
            fmt.sample_rate = read_u32(chunk + 12);
            fmt.bits_per_sample = read_u16(chunk + 22);
            if (fmt.format == kFormatExtensible) {
                if (size < 40) throw Error(ErrorCode::CorruptFile, "extensible fmt chunk too short");
                fmt.format = read_u16(chunk + 8 + 24);  // first two bytes of the subformat GUID
            }
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = size;
        }
        pos = body + size + (size & 1U);
    }

    if (!have_fmt) throw Error(ErrorCode::CorruptFile, "missing fmt chunk");
    if (data == nullptr) throw Error(ErrorCode::CorruptFile, "missing data chunk");
    if (fmt.channels != 1) {
        throw Error(ErrorCode::UnsupportedFormat,
                    "only mono audio is supported, got " + std::to_string(fmt.channels) + " channels");
    }
    if (fmt.sample_rate == 0) throw Error(ErrorCode::CorruptFile, "zero sample rate");

    std::vector<float> samples;
    if (fmt.format == kFormatPcm && fmt.bits_per_sample == 16) {
        if (data_size % 2 != 0) throw Error(ErrorCode::CorruptFile, "odd-sized PCM16 data chunk");
        samples.resize(data_size / 2);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto v = static_cast<std::int16_t>(read_u16(data + 2 * i));
            samples[i] = static_cast<float>(v) / 32768.0f;
        }
    } else if (fmt.format == kFormatFloat && fmt.bits_per_sample == 32) {
        if (data_size % 4 != 0) throw Error(ErrorCode::CorruptFile, "misaligned float32 data chunk");
        samples.resize(data_size / 4);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            samples[i] = std::bit_cast<float>(read_u32(data + 4 * i));
            if (!std::isfinite(samples[i])) throw Error(ErrorCode::CorruptFile, "non-finite float sample");
        }
    } else {
        throw Error(ErrorCode::UnsupportedFormat,
                    "unsupported codec (format " + std::to_string(fmt.format) + ", " +
                        std::to_string(fmt.bits_per_sample) + " bits)");
    }
    return AudioBuffer(std::move(samples), static_cast<int>(fmt.sample_rate));
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path, SampleFormat format) {
    const bool pcm = format == SampleFormat::pcm16;
    const std::uint16_t bytes_per_sample = pcm ? 2 : 4;
    const auto data_size = static_cast<std::uint32_t>(buffer.size() * bytes_per_sample);
    const auto rate = static_cast<std::uint32_t>(buffer.sample_rate_hz());

    std::string out;
    out.reserve(44 + data_size);
    out += "RIFF";
    put_u32(out, 36 + data_size);
    out += "WAVE";
    out += "fmt ";
    put_u32(out, 16);
    put_u16(out, pcm ? kFormatPcm : kFormatFloat);
    put_u16(out, 1);
    put_u32(out, rate);
    put_u32(out, rate * bytes_per_sample);
    put_u16(out, bytes_per_sample);
    put_u16(out, static_cast<std::uint16_t>(bytes_per_sample * 8));
    out += "data";
    put_u32(out, data_size);
    for (const float s : buffer.samples()) {
        if (pcm) {
            const double q = std::clamp(std::round(static_cast<double>(s) * 32768.0), -32768.0, 32767.0);
            put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
        } else {
            put_u32(out, std::bit_cast<std::uint32_t>(s));
        }
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------

WindowVector hann_window(std::size_t size) {
    if (size == 0) throw Error(ErrorCode::InvalidSize, "window size must be at least 1");
    WindowVector w;
    w.coefficients.assign(size, 1.0);
    if (size == 1) return w;
    const double denom = static_cast<double>(size - 1);
    // Fill the first half and mirror it so w(m) == w(size - 1 - m) bit for bit.
    for (std::size_t m = 0; m <= (size - 1) / 2; ++m) {
        const double v = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(m) / denom);
        w.coefficients[m] = v;
        w.coefficients[size - 1 - m] = v;
    }
    if (size % 2 == 1) w.coefficients[(size - 1) / 2] = 1.0;
    return w;
}

std::vector<SpeechRegion> detect_speech(const AudioBuffer& buffer, const VadParams& params) {
    if (buffer.empty()) throw Error(ErrorCode::EmptyBuffer, "cannot run VAD on an empty buffer");
    if (!(params.hop_s > 0.0) || params.frame_s < params.hop_s) {
        throw Error(ErrorCode::InvalidArgument, "VAD requires frame_s >= hop_s > 0");
    }

    const double rate = buffer.sample_rate_hz();
    const auto frame_len = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.frame_s * rate)));
    const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.hop_s * rate)));
    const auto samples = buffer.samples();

    // Frames start at every hop while they still touch the buffer; the tail frame may be partial.
    std::vector<double> energy;
    for (std::size_t start = 0; start < samples.size(); start += hop) {
        const std::size_t end = std::min(samples.size(), start + frame_len);
        double acc = 0.0;
        for (std::size_t i = start; i < end; ++i) acc += static_cast<double>(samples[i]) * samples[i];
        energy.push_back(acc / static_cast<double>(end - start));
        if (end == samples.size()) break;
    }

    const double peak = *std::max_element(energy.begin(), energy.end());
    if (peak <= 0.0) return {};
    const double threshold = peak * std::pow(10.0, params.threshold_db / 10.0);

    const double duration = buffer.duration_s();
    const std::size_t last = energy.size() - 1;
    const double half_hop = static_cast<double>(hop) / 2.0;
    auto onset = [&](std::size_t i) {
        if (i == 0) return 0.0;
        const double frame_end = static_cast<double>(std::min(samples.size(), i * hop + frame_len));
        return std::clamp((frame_end - half_hop) / rate, 0.0, duration);
    };
    auto offset = [&](std::size_t j) {
        if (j == last) return duration;
        return std::clamp((static_cast<double>(j * hop) + half_hop) / rate, 0.0, duration);
    };

    std::vector<SpeechRegion> regions;
    std::size_t i = 0;
    while (i < energy.size()) {
        if (energy[i] <= threshold) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < energy.size() && energy[j + 1] > threshold) ++j;
        const double begin = onset(i);
        const SpeechRegion region{begin, std::max(begin, offset(j))};
        if (region.length_s() >= params.min_region_s && region.length_s() > 0.0) regions.push_back(region);
        i = j + 1;
    }
    return regions;
}

double speech_duration(std::span<const SpeechRegion> regions) noexcept {
    double total = 0.0;
    for (const auto& r : regions) total += r.end_s - r.start_s;
    return total;
}

}  // namespace srate
