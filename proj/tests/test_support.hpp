#pragma once

#include "srate/alignment.hpp"
#include "srate/audio.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace srate::testing {

inline std::filesystem::path data_dir() { return std::filesystem::path(SRATE_TEST_DATA_DIR); }

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("srate_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::vector<float> tone(double freq_hz, double seconds, int rate = 16000, double amplitude = 0.5,
                               double phase = 0.0) {
    const auto n = static_cast<std::size_t>(std::lround(seconds * rate));
    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<float>(amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate + phase));
    }
    return out;
}

/// Concatenated tones, one per frequency, each `seconds` long. Phase runs on so joins are continuous.
inline std::vector<float> tone_sequence(const std::vector<double>& freqs, double seconds, int rate = 16000,
                                        double amplitude = 0.5) {
    std::vector<float> out;
    double phase = 0.0;
    for (const double f : freqs) {
        const auto n = static_cast<std::size_t>(std::lround(seconds * rate));
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(static_cast<float>(amplitude * std::sin(phase)));
            phase += 2.0 * std::numbers::pi * f / rate;
        }
    }
    return out;
}

inline std::vector<float> noise(double seconds, std::uint32_t seed, int rate = 16000, double amplitude = 1.0) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<float> dist(static_cast<float>(-amplitude), static_cast<float>(amplitude));
    std::vector<float> out(static_cast<std::size_t>(std::lround(seconds * rate)));
    for (auto& s : out) s = dist(gen);
    return out;
}

inline std::vector<float> zeros(double seconds, int rate = 16000) {
    return std::vector<float>(static_cast<std::size_t>(std::lround(seconds * rate)), 0.0f);
}

inline std::vector<float> concat(std::initializer_list<std::vector<float>> parts) {
    std::vector<float> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

/// Frequencies far enough apart that adjacent tones land in different Mel bands.
inline const std::vector<double>& distinct_frequencies() {
    static const std::vector<double> freqs{300.0, 1200.0, 500.0, 2000.0, 700.0, 3100.0, 400.0, 1600.0};
    return freqs;
}

/// Random alignment: 2-80 phonemes of 20-400 ms with optional silence segments and bare gaps.
inline PhonemeAlignment random_alignment(std::mt19937& gen) {
    std::uniform_int_distribution<int> n_phones(2, 80);
    std::uniform_real_distribution<double> dur(0.020, 0.400);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<PhonemeSegment> segs;
    double t = unit(gen) * 0.5;
    if (unit(gen) < 0.5) {
        segs.push_back({t, t + 0.2, "sil"});
        t += 0.2;
    }
    const int n = n_phones(gen);
    for (int i = 0; i < n; ++i) {
        const double roll = unit(gen);
        if (roll < 0.1) {
            const double d = dur(gen);
            segs.push_back({t, t + d, "sp"});
            t += d;
        } else if (roll < 0.2) {
            t += dur(gen);  // unlabeled gap
        }
        const double d = dur(gen);
        segs.push_back({t, t + d, "P" + std::to_string(i % 40)});
        t += d;
    }
    if (unit(gen) < 0.5) segs.push_back({t, t + 0.3, "sil"});
    return PhonemeAlignment(std::move(segs));
}

struct UtteranceFiles {
    std::filesystem::path wav;
    std::filesystem::path alignment;
    double speech_s = 0.0;
};

/// One tone per phoneme (cycling through distinct_frequencies), optional silence on both
/// edges, and the matching alignment with "sil" edge labels.
inline UtteranceFiles write_utterance(const std::filesystem::path& dir, const std::string& name,
                                      const std::vector<double>& durations, double edge_silence_s = 0.0,
                                      int rate = 16000, std::size_t freq_offset = 0) {
    const auto& freqs = distinct_frequencies();
    std::vector<float> samples = zeros(edge_silence_s, rate);
    std::ofstream tsv(dir / (name + ".tsv"));
    tsv.precision(17);
    double t = 0.0;
    if (edge_silence_s > 0.0) {
        t = static_cast<double>(samples.size()) / rate;
        tsv << 0.0 << '\t' << t << "\tsil\n";
    }
    double phase = 0.0;
    double speech = 0.0;
    for (std::size_t i = 0; i < durations.size(); ++i) {
        const double f = freqs[(i + freq_offset) % freqs.size()];
        const auto n = static_cast<std::size_t>(std::lround(durations[i] * rate));
        for (std::size_t k = 0; k < n; ++k) {
            samples.push_back(static_cast<float>(0.5 * std::sin(phase)));
            phase += 2.0 * std::numbers::pi * f / rate;
        }
        const double end = static_cast<double>(samples.size()) / rate;
        tsv << t << '\t' << end << "\tP" << i << '\n';
        speech += end - t;
        t = end;
    }
    if (edge_silence_s > 0.0) {
        const auto tail = zeros(edge_silence_s, rate);
        samples.insert(samples.end(), tail.begin(), tail.end());
        tsv << t << '\t' << static_cast<double>(samples.size()) / rate << "\tsil\n";
    }
    UtteranceFiles files{dir / (name + ".wav"), dir / (name + ".tsv"), speech};
    write_wav(AudioBuffer(std::move(samples), rate), files.wav);
    return files;
}

}  // namespace srate::testing
