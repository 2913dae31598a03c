#pragma once

#include "srate/alignment.hpp"
#include "srate/audio.hpp"
#include "srate/ratemath.hpp"
#include "srate/segmentation.hpp"
#include "srate/wsola.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace srate {

enum class RateMode {
    aligned,       // phoneme count and duration from a forced alignment
    unsupervised,  // boundary count over VAD speech duration
};

RateMode parse_rate_mode(std::string_view text);
std::string_view to_string(RateMode mode) noexcept;

enum class DurationMeasure {
    total,        // whole file
    speech_span,  // first VAD region start to last VAD region end
};

struct RateOptions {
    RateMode mode = RateMode::aligned;
    bool vad_duration = false;  // aligned mode: take N from the VAD instead of the alignment
    PauseHandling pauses = PauseHandling::exclude_all;
    LabelSet silence_labels = default_silence_labels();
    VadParams vad;
    SegmentationParams segmentation;
};

struct RateEstimate {
    double rate = 0.0;        // phonemes per second
    double count = 0.0;       // phonemes (aligned) or boundaries (unsupervised)
    double duration_s = 0.0;  // N
};

RateEstimate estimate_rate(const AudioBuffer& audio, const PhonemeAlignment* alignment, const RateOptions& options);
RateEstimate estimate_rate(const std::filesystem::path& wav, const std::optional<std::filesystem::path>& alignment,
                           const RateOptions& options);

struct ConversionJob {
    std::string id;
    std::string speaker;
    std::string target_speaker;
    std::filesystem::path source_wav;
    std::optional<std::filesystem::path> target_wav;  // rate reference utterance
    std::optional<double> target_rate;                // overrides target_wav
    std::optional<std::filesystem::path> source_alignment;
    std::optional<std::filesystem::path> target_alignment;
    std::optional<std::filesystem::path> parallel_target_wav;  // same sentence by the target speaker
    std::optional<double> target_duration_s;                   // overrides parallel_target_wav
    std::optional<std::filesystem::path> predicted_curve;      // local-rate prediction for the source
    RateMode mode = RateMode::aligned;
    std::filesystem::path output_wav;

    /// Throws ModeInputMissing when the job cannot produce both rates.
    void validate() const;
};

struct ConvertOptions {
    RateOptions rate;
    double wsola_frame_s = 0.025;
    double wsola_tolerance_s = 0.0075;
    double jnd_threshold = 0.05;
    DurationMeasure duration = DurationMeasure::total;
    double boundary_tolerance_s = 0.02;
    double grid_step_s = kDefaultGridStep_s;
    double window_s = kDefaultSmoothingWindow_s;
    double min_utterance_s = 2.0;  // shorter sources get a warning
};

struct EvalReport {
    double source_rate = 0.0;
    double target_rate = 0.0;
    double alpha = 1.0;
    double source_duration_s = 0.0;
    double output_duration_s = 0.0;
    std::optional<double> target_duration_s;
    std::optional<double> norm_duration_diff;
    std::optional<bool> within_jnd;
    double jnd_threshold = 0.05;
    std::optional<RateErrorReport> rate_errors;
    std::optional<BoundaryMetrics> boundary_metrics;
    std::vector<std::string> warnings;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Signed (converted - target) / target.
double duration_difference(double converted_s, double target_s);

bool within_jnd(double norm_duration_diff, double jnd_threshold) noexcept;

double measure_duration(const AudioBuffer& audio, DurationMeasure measure, const VadParams& vad);

/// Estimates both rates, stretches the source by alpha = target / source and writes job.output_wav.
EvalReport convert(const ConversionJob& job, const ConvertOptions& options);

struct JobOutcome {
    std::size_t index = 0;
    ConversionJob job;
    std::optional<EvalReport> report;
    std::string error;
};

struct BatchReport {
    std::vector<JobOutcome> jobs;
    nlohmann::json aggregate;
    nlohmann::json speakers;
};

/// Parses a JSON-lines manifest; relative paths resolve against `base_dir`.
std::vector<ConversionJob> parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});

/// Runs every job (up to `threads` at once), keeping manifest order. Job failures are recorded, not thrown.
BatchReport run_batch(const std::vector<ConversionJob>& jobs, const ConvertOptions& options, unsigned threads = 1);

/// Reads the manifest, runs it and writes the JSON summary to `output`. Returns the summary.
nlohmann::json batch_evaluate(const std::filesystem::path& manifest, const std::filesystem::path& output,
                              const ConvertOptions& options, unsigned threads = 1);

inline constexpr int kReportSchema = 1;

nlohmann::json to_json(const BatchReport& report);

void to_json(nlohmann::json& j, const RateErrorReport& r);
void from_json(const nlohmann::json& j, RateErrorReport& r);
void to_json(nlohmann::json& j, const BoundaryMetrics& m);
void from_json(const nlohmann::json& j, BoundaryMetrics& m);
void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);
void to_json(nlohmann::json& j, const ConversionJob& job);
void from_json(const nlohmann::json& j, ConversionJob& job);

}  // namespace srate
