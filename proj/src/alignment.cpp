#include "srate/alignment.hpp"

#include "srate/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace srate {

namespace {

constexpr double kOverlapTolerance_s = 1e-3;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    if (line.find('\t') != std::string_view::npos) {
        std::size_t pos = 0;
        while (true) {
            const auto tab = line.find('\t', pos);
            fields.push_back(trim(line.substr(pos, tab == std::string_view::npos ? line.npos : tab - pos)));
            if (tab == std::string_view::npos) break;
            pos = tab + 1;
        }
    } else {
        std::size_t pos = 0;
        while (pos < line.size()) {
            const auto begin = line.find_first_not_of(" ", pos);
            if (begin == std::string_view::npos) break;
            const auto end = line.find(' ', begin);
            fields.push_back(line.substr(begin, end == std::string_view::npos ? line.npos : end - begin));
            pos = end == std::string_view::npos ? line.size() : end;
        }
    }
    return fields;
}

double parse_seconds(std::string_view field, std::size_t line_no) {
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": invalid time '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace

LabelSet default_silence_labels() { return {"sil", "sp", "spn", ""}; }

PhonemeAlignment::PhonemeAlignment(std::vector<PhonemeSegment> segments, LabelSet silence_labels)
    : segments_(std::move(segments)), silence_labels_(std::move(silence_labels)) {
    for (const auto& s : segments_) {
        if (!std::isfinite(s.start_s) || !std::isfinite(s.end_s) || s.start_s < 0.0 || !(s.end_s > s.start_s)) {
            throw Error(ErrorCode::InvalidArgument, "segment '" + s.label + "' must satisfy 0 <= start < end");
        }
    }
    std::stable_sort(segments_.begin(), segments_.end(),
                     [](const PhonemeSegment& a, const PhonemeSegment& b) { return a.start_s < b.start_s; });
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
        auto& cur = segments_[i];
        const auto& next = segments_[i + 1];
        if (cur.end_s <= next.start_s) continue;
        if (cur.end_s - next.start_s > kOverlapTolerance_s || !(next.start_s > cur.start_s)) {
            std::ostringstream msg;
            msg << "segments '" << cur.label << "' [" << cur.start_s << ", " << cur.end_s << ") and '" << next.label
                << "' [" << next.start_s << ", " << next.end_s << ") overlap";
            throw Error(ErrorCode::OverlapError, msg.str());
        }
        cur.end_s = next.start_s;
    }
}

PhonemeAlignment parse_alignment(std::string_view text, LabelSet silence_labels) {
    std::vector<PhonemeSegment> segments;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const auto content = trim(line);
        if (content.empty() || content.front() == '#') continue;

        const auto fields = split_fields(content);
        if (fields.size() < 2 || fields.size() > 3) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 'start end label'");
        }
        PhonemeSegment seg;
        seg.start_s = parse_seconds(fields[0], line_no);
        seg.end_s = parse_seconds(fields[1], line_no);
        if (fields.size() == 3) seg.label = std::string(fields[2]);
        if (seg.start_s < 0.0) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": negative start time");
        }
        if (!(seg.end_s > seg.start_s)) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": end must be after start");
        }
        segments.push_back(std::move(seg));
    }
    return PhonemeAlignment(std::move(segments), std::move(silence_labels));
}

PhonemeAlignment read_alignment(const std::filesystem::path& path, LabelSet silence_labels) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_alignment(text.str(), std::move(silence_labels));
}

std::string format_alignment(const PhonemeAlignment& alignment) {
    std::ostringstream out;
    out.precision(17);
    for (const auto& s : alignment.segments()) out << s.start_s << '\t' << s.end_s << '\t' << s.label << '\n';
    return out.str();
}

PhonemeAlignment trim_silence(const PhonemeAlignment& alignment) {
    const auto segs = alignment.segments();
    auto first = std::find_if(segs.begin(), segs.end(), [&](const auto& s) { return !alignment.is_silence(s); });
    if (first == segs.end()) throw Error(ErrorCode::EmptyAlignment, "alignment has no phonemes after trimming");
    auto last = std::find_if(segs.rbegin(), segs.rend(), [&](const auto& s) { return !alignment.is_silence(s); });
    return PhonemeAlignment(std::vector<PhonemeSegment>(first, last.base()), alignment.silence_labels());
}

std::size_t phoneme_count(const PhonemeAlignment& alignment) noexcept {
    return static_cast<std::size_t>(std::count_if(alignment.segments().begin(), alignment.segments().end(),
                                                  [&](const auto& s) { return !alignment.is_silence(s); }));
}

double alignment_speech_duration(const PhonemeAlignment& alignment, PauseHandling pauses) {
    double first = 0.0;
    double last = 0.0;
    double sum = 0.0;
    bool seen = false;
    for (const auto& s : alignment.segments()) {
        if (alignment.is_silence(s)) continue;
        if (!seen) first = s.start_s;
        seen = true;
        last = s.end_s;
        sum += s.duration_s();
    }
    if (!seen) return 0.0;
    return pauses == PauseHandling::exclude_all ? sum : last - first;
}

double utterance_phoneme_rate(const PhonemeAlignment& alignment,
                              std::optional<std::span<const SpeechRegion>> speech_regions, PauseHandling pauses) {
    const auto count = phoneme_count(alignment);
    if (count == 0) throw Error(ErrorCode::EmptyAlignment, "no phonemes in alignment");
    const double duration =
        speech_regions ? speech_duration(*speech_regions) : alignment_speech_duration(alignment, pauses);
    if (!(duration > 0.0)) throw Error(ErrorCode::ZeroDuration, "speech duration is zero");
    return static_cast<double>(count) / duration;
}

std::vector<double> reference_boundaries(const PhonemeAlignment& alignment) {
    const auto segs = alignment.segments();
    auto first = std::find_if(segs.begin(), segs.end(), [&](const auto& s) { return !alignment.is_silence(s); });
    if (first == segs.end()) return {};
    auto last = std::find_if(segs.rbegin(), segs.rend(), [&](const auto& s) { return !alignment.is_silence(s); });
    const double lo = first->start_s;
    const double hi = last->end_s;

    std::vector<double> edges;
    for (const auto& s : segs) {
        for (const double t : {s.start_s, s.end_s}) {
            if (t > lo + kOverlapTolerance_s && t < hi - kOverlapTolerance_s) edges.push_back(t);
        }
    }
    std::sort(edges.begin(), edges.end());
    std::vector<double> out;
    for (const double t : edges) {
        if (out.empty() || t - out.back() > kOverlapTolerance_s) out.push_back(t);
    }
    return out;
}

}  // namespace srate
