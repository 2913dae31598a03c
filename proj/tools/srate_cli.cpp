// srate: speaking-rate estimation, WSOLA tempo adaptation and evaluation.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include "srate/error.hpp"
#include "srate/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct CommonFlags {
    double grid_ms = 10.0;
    double window_ms = 625.0;
    double vad_threshold_db = -40.0;
    double wsola_frame_ms = 25.0;
    double wsola_tolerance_ms = 7.5;
    double jnd = 0.05;
    std::string mode = "aligned";
    std::string silence_labels = "sil,sp,spn,";
    std::string pauses = "all";
    std::string duration = "total";
    bool vad_duration = false;
    bool no_vad = false;
    double min_separation_ms = 40.0;
    double min_prominence = 0.05;
    double relative_prominence = 0.1;

    srate::LabelSet labels() const {
        srate::LabelSet out;
        std::stringstream in(silence_labels);
        std::string label;
        while (std::getline(in, label, ',')) out.insert(label);
        if (!silence_labels.empty() && silence_labels.back() == ',') out.insert("");
        return out;
    }

    srate::RateOptions rate_options() const {
        srate::RateOptions o;
        o.mode = srate::parse_rate_mode(mode);
        o.vad_duration = vad_duration;
        if (pauses == "edges") {
            o.pauses = srate::PauseHandling::edges_only;
        } else if (pauses != "all") {
            throw srate::Error(srate::ErrorCode::InvalidArgument, "--pauses must be 'all' or 'edges'");
        }
        o.silence_labels = labels();
        o.vad.threshold_db = vad_threshold_db;
        o.segmentation.use_vad = !no_vad;
        o.segmentation.min_separation_s = min_separation_ms / 1000.0;
        o.segmentation.min_prominence = min_prominence;
        o.segmentation.relative_prominence = relative_prominence;
        return o;
    }

    srate::ConvertOptions convert_options() const {
        srate::ConvertOptions o;
        o.rate = rate_options();
        o.wsola_frame_s = wsola_frame_ms / 1000.0;
        o.wsola_tolerance_s = wsola_tolerance_ms / 1000.0;
        o.jnd_threshold = jnd;
        o.grid_step_s = grid_ms / 1000.0;
        o.window_s = window_ms / 1000.0;
        if (duration == "vad-span") {
            o.duration = srate::DurationMeasure::speech_span;
        } else if (duration != "total") {
            throw srate::Error(srate::ErrorCode::InvalidArgument, "--duration must be 'total' or 'vad-span'");
        }
        return o;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Speaking-rate estimation and WSOLA tempo adaptation"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonFlags flags;
    app.add_option("--grid-ms", flags.grid_ms, "Rate-curve grid step in ms")->capture_default_str();
    app.add_option("--window-ms", flags.window_ms, "Local-rate Hann window in ms")->capture_default_str();
    app.add_option("--vad-threshold-db", flags.vad_threshold_db, "VAD threshold relative to the loudest frame")
        ->capture_default_str();
    app.add_option("--wsola-frame-ms", flags.wsola_frame_ms, "WSOLA frame length in ms")->capture_default_str();
    app.add_option("--wsola-tolerance-ms", flags.wsola_tolerance_ms, "WSOLA search radius in ms")->capture_default_str();
    app.add_option("--jnd", flags.jnd, "Relative duration difference counted as imperceptible")->capture_default_str();
    app.add_option("--mode", flags.mode, "Rate estimator")->check(CLI::IsMember({"aligned", "unsupervised"}))->capture_default_str();
    app.add_option("--silence-labels", flags.silence_labels, "Comma-separated non-phoneme labels (trailing comma adds the empty label)")
        ->capture_default_str();
    app.add_option("--pauses", flags.pauses, "Alignment duration: 'all' excludes every pause, 'edges' only edge silence")
        ->check(CLI::IsMember({"all", "edges"}))->capture_default_str();
    app.add_option("--duration", flags.duration, "Duration measure for evaluation")
        ->check(CLI::IsMember({"total", "vad-span"}))->capture_default_str();
    app.add_flag("--vad-duration", flags.vad_duration, "Aligned mode: take speech duration from the VAD");
    app.add_flag("--no-vad", flags.no_vad, "Unsupervised mode: segment the whole buffer");
    app.add_option("--min-separation-ms", flags.min_separation_ms, "Minimum gap between boundaries")->capture_default_str();
    app.add_option("--min-prominence", flags.min_prominence, "Absolute floor on peak prominence")->capture_default_str();
    app.add_option("--relative-prominence", flags.relative_prominence, "Peak prominence as a fraction of the curve maximum")
        ->capture_default_str();

    auto* rate_cmd = app.add_subcommand("rate", "Print the phoneme rate of an utterance");
    std::string rate_wav;
    std::string rate_alignment;
    bool rate_verbose = false;
    rate_cmd->add_option("wav", rate_wav, "Input WAV")->required()->check(CLI::ExistingFile);
    rate_cmd->add_option("--alignment,-a", rate_alignment, "Phoneme alignment TSV")->check(CLI::ExistingFile);
    rate_cmd->add_flag("--verbose,-v", rate_verbose, "Also print count and duration");

    auto* stretch_cmd = app.add_subcommand("stretch", "Time-stretch a WAV by a tempo factor");
    std::string stretch_in;
    std::string stretch_out;
    double stretch_alpha = 1.0;
    stretch_cmd->add_option("input", stretch_in, "Input WAV")->required()->check(CLI::ExistingFile);
    stretch_cmd->add_option("output", stretch_out, "Output WAV")->required();
    stretch_cmd->add_option("--alpha", stretch_alpha, "Tempo factor (>1 shortens)")->required();

    auto* convert_cmd = app.add_subcommand("convert", "Adapt a source utterance to a target speaking rate");
    srate::ConversionJob job;
    std::string job_source, job_output, job_target, job_source_al, job_target_al, job_parallel, job_report;
    double job_target_rate = 0.0;
    double job_target_duration = 0.0;
    convert_cmd->add_option("--source", job_source, "Source WAV")->required()->check(CLI::ExistingFile);
    convert_cmd->add_option("--output,-o", job_output, "Output WAV")->required();
    auto* target_opt = convert_cmd->add_option("--target", job_target, "Rate-reference WAV")->check(CLI::ExistingFile);
    auto* target_rate_opt = convert_cmd->add_option("--target-rate", job_target_rate, "Explicit target rate (phonemes/s)");
    target_opt->excludes(target_rate_opt);
    convert_cmd->add_option("--source-alignment", job_source_al, "Source alignment TSV")->check(CLI::ExistingFile);
    convert_cmd->add_option("--target-alignment", job_target_al, "Target alignment TSV")->check(CLI::ExistingFile);
    auto* parallel_opt =
        convert_cmd->add_option("--parallel-target", job_parallel, "Parallel target WAV for duration evaluation")
            ->check(CLI::ExistingFile);
    auto* target_dur_opt = convert_cmd->add_option("--target-duration", job_target_duration, "Parallel target duration in s");
    parallel_opt->excludes(target_dur_opt);
    convert_cmd->add_option("--report", job_report, "Write the JSON report here as well");

    auto* segment_cmd = app.add_subcommand("segment", "Print unsupervised phoneme boundaries, one per line");
    std::string segment_wav;
    std::string segment_features;
    segment_cmd->add_option("wav", segment_wav, "Input WAV")->check(CLI::ExistingFile);
    segment_cmd->add_option("--features", segment_features, "Precomputed feature file (float32)")->check(CLI::ExistingFile);

    auto* eval_cmd = app.add_subcommand("eval", "Run a JSON-lines manifest of conversions and write a JSON report");
    std::string eval_manifest;
    std::string eval_output;
    unsigned eval_threads = 1;
    eval_cmd->add_option("manifest", eval_manifest, "Manifest (one job per line)")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--output,-o", eval_output, "Report path")->required();
    eval_cmd->add_option("--threads,-j", eval_threads, "Parallel jobs")->capture_default_str();

    auto* curve_cmd = app.add_subcommand("local-rate", "Print the local phoneme rate curve of an alignment (time, value)");
    std::string curve_alignment;
    bool curve_instantaneous = false;
    curve_cmd->add_option("alignment", curve_alignment, "Alignment TSV")->required()->check(CLI::ExistingFile);
    curve_cmd->add_flag("--instantaneous", curve_instantaneous, "Print the unsmoothed step curve instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        std::cout << std::setprecision(10);
        if (*rate_cmd) {
            std::optional<std::filesystem::path> alignment;
            if (!rate_alignment.empty()) alignment = rate_alignment;
            const auto est = srate::estimate_rate(rate_wav, alignment, flags.rate_options());
            std::cout << est.rate << '\n';
            if (rate_verbose) std::cout << "count " << est.count << "\nduration_s " << est.duration_s << '\n';
        } else if (*stretch_cmd) {
            const auto input = srate::read_wav(stretch_in);
            const auto params = srate::StretchParams::for_sample_rate(
                input.sample_rate_hz(), flags.wsola_frame_ms / 1000.0, flags.wsola_tolerance_ms / 1000.0);
            const auto result = srate::time_stretch(input, stretch_alpha, params);
            srate::write_wav(result.audio, stretch_out);
            std::cout << "achieved_ratio " << result.achieved_ratio << '\n';
        } else if (*convert_cmd) {
            job.mode = srate::parse_rate_mode(flags.mode);
            job.source_wav = job_source;
            job.output_wav = job_output;
            if (!job_target.empty()) job.target_wav = job_target;
            if (*target_rate_opt) job.target_rate = job_target_rate;
            if (!job_source_al.empty()) job.source_alignment = job_source_al;
            if (!job_target_al.empty()) job.target_alignment = job_target_al;
            if (!job_parallel.empty()) job.parallel_target_wav = job_parallel;
            if (*target_dur_opt) job.target_duration_s = job_target_duration;
            const auto report = srate::convert(job, flags.convert_options());
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
            nlohmann::json j = report;
            j["schema"] = srate::kReportSchema;
            std::cout << j.dump(2) << '\n';
            if (!job_report.empty()) {
                std::ofstream out(job_report);
                out << j.dump(2) << '\n';
                if (!out) throw srate::Error(srate::ErrorCode::IoError, "cannot write " + job_report);
            }
        } else if (*segment_cmd) {
            const auto opts = flags.rate_options();
            srate::BoundaryList boundaries;
            if (!segment_features.empty()) {
                const auto curve = srate::dissimilarity_curve(srate::read_features(segment_features));
                const double peak = curve.values.empty() ? 0.0 : *std::max_element(curve.values.begin(), curve.values.end());
                boundaries = srate::detect_boundaries(
                    curve, std::max(opts.segmentation.min_prominence, opts.segmentation.relative_prominence * peak),
                    opts.segmentation.min_separation_s);
            } else if (!segment_wav.empty()) {
                auto seg = opts.segmentation;
                seg.vad = opts.vad;
                boundaries = srate::segment_unsupervised(srate::read_wav(segment_wav), seg);
            } else {
                std::cerr << "segment: give a WAV or --features\n";
                return kExitUsage;
            }
            for (const double t : boundaries.times_s) std::cout << t << '\n';
        } else if (*eval_cmd) {
            const auto summary = srate::batch_evaluate(eval_manifest, eval_output, flags.convert_options(), eval_threads);
            std::cout << summary["aggregate"].dump(2) << '\n';
        } else if (*curve_cmd) {
            const auto alignment = srate::read_alignment(curve_alignment, flags.labels());
            auto curve = srate::instantaneous_rate(alignment, flags.grid_ms / 1000.0);
            if (!curve_instantaneous) curve = srate::local_rate(curve, flags.window_ms / 1000.0);
            srate::write_rate_curve(curve, std::cout);
        }
    } catch (const srate::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return 0;
}
