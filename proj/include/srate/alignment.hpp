#pragma once

#include "srate/audio.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace srate {

struct PhonemeSegment {
    double start_s = 0.0;
    double end_s = 0.0;
    std::string label;

    double duration_s() const noexcept { return end_s - start_s; }
    friend bool operator==(const PhonemeSegment&, const PhonemeSegment&) = default;
};

using LabelSet = std::set<std::string, std::less<>>;

/// MFA and Kaldi silence conventions, plus the empty label.
LabelSet default_silence_labels();

/// Time-ordered phoneme segments registered to an utterance's audio.
///
/// Construction sorts the segments and validates them: every segment has
/// end > start >= 0, and consecutive segments may overlap by at most 1 ms
/// (such overlaps are snapped so the earlier segment ends where the next begins).
/// Gaps between segments are allowed and count as silence.
class PhonemeAlignment {
public:
    PhonemeAlignment() : silence_labels_(default_silence_labels()) {}
    explicit PhonemeAlignment(std::vector<PhonemeSegment> segments,
                              LabelSet silence_labels = default_silence_labels());

    std::span<const PhonemeSegment> segments() const noexcept { return segments_; }
    const LabelSet& silence_labels() const noexcept { return silence_labels_; }
    bool empty() const noexcept { return segments_.empty(); }
    bool is_silence(const PhonemeSegment& s) const { return silence_labels_.contains(s.label); }

    friend bool operator==(const PhonemeAlignment&, const PhonemeAlignment&) = default;

private:
    std::vector<PhonemeSegment> segments_;
    LabelSet silence_labels_;
};

/// Parses "start<TAB>end<TAB>label" lines. Blank lines and '#' comments are skipped.
/// A line without tabs is split on whitespace; a missing label reads as "".
PhonemeAlignment parse_alignment(std::string_view text, LabelSet silence_labels = default_silence_labels());
PhonemeAlignment read_alignment(const std::filesystem::path& path,
                                LabelSet silence_labels = default_silence_labels());
std::string format_alignment(const PhonemeAlignment& alignment);

/// Drops leading and trailing silence segments; times are left untouched.
PhonemeAlignment trim_silence(const PhonemeAlignment& alignment);

std::size_t phoneme_count(const PhonemeAlignment& alignment) noexcept;

enum class PauseHandling {
    exclude_all,  // N = summed non-silence segment durations
    edges_only,   // N = first phoneme start .. last phoneme end
};

/// Sum of non-silence segment durations, or the outer phoneme span for edges_only.
double alignment_speech_duration(const PhonemeAlignment& alignment,
                                 PauseHandling pauses = PauseHandling::exclude_all);

/// C_p / N in phonemes per second. N comes from the speech regions when given,
/// otherwise from the alignment itself.
double utterance_phoneme_rate(const PhonemeAlignment& alignment,
                              std::optional<std::span<const SpeechRegion>> speech_regions = std::nullopt,
                              PauseHandling pauses = PauseHandling::exclude_all);

/// Interior phoneme boundaries: every segment edge strictly inside the outer
/// phoneme span, deduplicated within 1 ms.
std::vector<double> reference_boundaries(const PhonemeAlignment& alignment);

}  // namespace srate
