#include "srate/pipeline.hpp"

#include "srate/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace srate {

using nlohmann::json;

RateMode parse_rate_mode(std::string_view text) {
    if (text == "aligned") return RateMode::aligned;
    if (text == "unsupervised") return RateMode::unsupervised;
    throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(text) + "'");
}

std::string_view to_string(RateMode mode) noexcept {
    return mode == RateMode::aligned ? "aligned" : "unsupervised";
}

// ---------------------------------------------------------------------------
// Rate estimation

RateEstimate estimate_rate(const AudioBuffer& audio, const PhonemeAlignment* alignment, const RateOptions& options) {
    RateEstimate est;
    if (options.mode == RateMode::aligned) {
        if (alignment == nullptr) throw Error(ErrorCode::ModeInputMissing, "aligned mode needs a phoneme alignment");
        const auto trimmed = trim_silence(*alignment);
        est.count = static_cast<double>(phoneme_count(trimmed));
        if (options.vad_duration) {
            const auto regions = detect_speech(audio, options.vad);
            est.duration_s = speech_duration(regions);
            est.rate = utterance_phoneme_rate(trimmed, std::span<const SpeechRegion>(regions));
        } else {
            est.duration_s = alignment_speech_duration(trimmed, options.pauses);
            est.rate = utterance_phoneme_rate(trimmed, std::nullopt, options.pauses);
        }
        return est;
    }

    auto seg = options.segmentation;
    seg.vad = options.vad;
    est.count = static_cast<double>(count_phonemes_unsupervised(audio, seg));
    est.duration_s = seg.use_vad ? speech_duration(detect_speech(audio, options.vad)) : audio.duration_s();
    if (!(est.duration_s > 0.0)) throw Error(ErrorCode::ZeroDuration, "no speech detected");
    est.rate = est.count / est.duration_s;
    return est;
}

RateEstimate estimate_rate(const std::filesystem::path& wav, const std::optional<std::filesystem::path>& alignment,
                           const RateOptions& options) {
    const auto audio = read_wav(wav);
    if (options.mode == RateMode::aligned) {
        if (!alignment) throw Error(ErrorCode::ModeInputMissing, "aligned mode needs --alignment");
        const auto parsed = read_alignment(*alignment, options.silence_labels);
        return estimate_rate(audio, &parsed, options);
    }
    return estimate_rate(audio, nullptr, options);
}

// ---------------------------------------------------------------------------
// Conversion

void ConversionJob::validate() const {
    if (source_wav.empty()) throw Error(ErrorCode::ModeInputMissing, "job has no source_wav");
    if (output_wav.empty()) throw Error(ErrorCode::ModeInputMissing, "job has no output_wav");
    if (!target_rate && !target_wav) {
        throw Error(ErrorCode::ModeInputMissing, "job needs target_wav or target_rate");
    }
    if (mode == RateMode::aligned) {
        if (!source_alignment) throw Error(ErrorCode::ModeInputMissing, "aligned mode needs source_alignment");
        if (!target_rate && !target_alignment) {
            throw Error(ErrorCode::ModeInputMissing, "aligned mode needs target_alignment or target_rate");
        }
    }
}

double duration_difference(double converted_s, double target_s) {
    if (!(target_s > 0.0)) throw Error(ErrorCode::ZeroTargetDuration, "target duration must be positive");
    return (converted_s - target_s) / target_s;
}

bool within_jnd(double norm_duration_diff, double jnd_threshold) noexcept {
    return std::abs(norm_duration_diff) <= jnd_threshold;
}

double measure_duration(const AudioBuffer& audio, DurationMeasure measure, const VadParams& vad) {
    if (measure == DurationMeasure::total || audio.empty()) return audio.duration_s();
    const auto regions = detect_speech(audio, vad);
    if (regions.empty()) return 0.0;
    return regions.back().end_s - regions.front().start_s;
}

EvalReport convert(const ConversionJob& job, const ConvertOptions& options) {
    job.validate();
    auto rate_options = options.rate;
    rate_options.mode = job.mode;

    const auto source = read_wav(job.source_wav);
    std::optional<PhonemeAlignment> source_alignment;
    if (job.source_alignment) source_alignment = read_alignment(*job.source_alignment, rate_options.silence_labels);

    EvalReport report;
    report.jnd_threshold = options.jnd_threshold;
    report.source_rate = estimate_rate(source, source_alignment ? &*source_alignment : nullptr, rate_options).rate;

    if (job.target_rate) {
        report.target_rate = *job.target_rate;
    } else {
        const auto target = read_wav(*job.target_wav);
        if (target.sample_rate_hz() != source.sample_rate_hz()) {
            throw Error(ErrorCode::SampleRateMismatch, "source is " + std::to_string(source.sample_rate_hz()) +
                                                           " Hz, target is " + std::to_string(target.sample_rate_hz()) + " Hz");
        }
        std::optional<PhonemeAlignment> target_alignment;
        if (job.target_alignment) target_alignment = read_alignment(*job.target_alignment, rate_options.silence_labels);
        report.target_rate = estimate_rate(target, target_alignment ? &*target_alignment : nullptr, rate_options).rate;
    }

    report.alpha = interpolation_factor(report.source_rate, report.target_rate);
    const auto params =
        StretchParams::for_sample_rate(source.sample_rate_hz(), options.wsola_frame_s, options.wsola_tolerance_s);
    const auto stretched = time_stretch(source, report.alpha, params);
    write_wav(stretched.audio, job.output_wav);

    const auto& vad = rate_options.vad;
    report.source_duration_s = measure_duration(source, options.duration, vad);
    report.output_duration_s = measure_duration(stretched.audio, options.duration, vad);

    if (job.target_duration_s) {
        report.target_duration_s = *job.target_duration_s;
    } else if (job.parallel_target_wav) {
        report.target_duration_s = measure_duration(read_wav(*job.parallel_target_wav), options.duration, vad);
    }
    if (report.target_duration_s) {
        report.norm_duration_diff = duration_difference(report.output_duration_s, *report.target_duration_s);
        report.within_jnd = within_jnd(*report.norm_duration_diff, options.jnd_threshold);
    }

    const double source_span = source_alignment && phoneme_count(*source_alignment) > 0
                                   ? alignment_speech_duration(trim_silence(*source_alignment), PauseHandling::edges_only)
                                   : measure_duration(source, DurationMeasure::speech_span, vad);
    if (source_span < options.min_utterance_s) {
        std::ostringstream msg;
        msg << "source speech span " << source_span << " s is shorter than " << options.min_utterance_s << " s";
        report.warnings.push_back(msg.str());
    }

    if (job.predicted_curve && source_alignment) {
        const auto predicted = read_rate_curve(*job.predicted_curve, options.grid_step_s);
        report.rate_errors = evaluate_rate_prediction(predicted, *source_alignment, options.window_s);
    } else if (job.mode == RateMode::unsupervised && source_alignment) {
        auto seg = rate_options.segmentation;
        seg.vad = vad;
        const auto predicted = segment_unsupervised(source, seg);
        const auto trimmed = trim_silence(*source_alignment);
        report.rate_errors = rate_errors(static_cast<double>(predicted.times_s.size()), phoneme_count(trimmed));
        report.boundary_metrics =
            boundary_metrics(predicted, BoundaryList{reference_boundaries(trimmed)}, options.boundary_tolerance_s);
    }
    return report;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
    j[key] = value ? json(*value) : json(nullptr);
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->template get<T>();
}

std::optional<std::filesystem::path> get_path(const json& j, const char* key) {
    if (auto s = get_optional<std::string>(j, key)) return std::filesystem::path(*s);
    return std::nullopt;
}

void put_path(json& j, const char* key, const std::optional<std::filesystem::path>& p) {
    j[key] = p ? json(p->string()) : json(nullptr);
}

json mean_or_null(const std::vector<double>& values) {
    if (values.empty()) return nullptr;
    double sum = 0.0;
    for (const double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace

void to_json(json& j, const RateErrorReport& r) {
    j = json{{"e_cp", r.e_cp}, {"rel_error", r.rel_error}};
    put_optional(j, "pearson_r", r.pearson_r);
}

void from_json(const json& j, RateErrorReport& r) {
    r.e_cp = j.at("e_cp").get<double>();
    r.rel_error = j.at("rel_error").get<double>();
    r.pearson_r = get_optional<double>(j, "pearson_r");
}

void to_json(json& j, const BoundaryMetrics& m) {
    j = json{{"precision", m.precision}, {"recall", m.recall},     {"f1", m.f1},
             {"r_value", m.r_value},     {"tolerance_s", m.tolerance_s}, {"matches", m.matches},
             {"predicted", m.predicted}, {"reference", m.reference}};
}

void from_json(const json& j, BoundaryMetrics& m) {
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.r_value = j.at("r_value").get<double>();
    m.tolerance_s = j.at("tolerance_s").get<double>();
    m.matches = j.value("matches", std::size_t{0});
    m.predicted = j.value("predicted", std::size_t{0});
    m.reference = j.value("reference", std::size_t{0});
}

void to_json(json& j, const EvalReport& r) {
    j = json{{"source_rate", r.source_rate},
             {"target_rate", r.target_rate},
             {"alpha", r.alpha},
             {"source_duration_s", r.source_duration_s},
             {"output_duration_s", r.output_duration_s},
             {"jnd_threshold", r.jnd_threshold},
             {"warnings", r.warnings}};
    put_optional(j, "target_duration_s", r.target_duration_s);
    put_optional(j, "norm_duration_diff", r.norm_duration_diff);
    put_optional(j, "within_jnd", r.within_jnd);
    put_optional(j, "rate_errors", r.rate_errors);
    put_optional(j, "boundary_metrics", r.boundary_metrics);
}

void from_json(const json& j, EvalReport& r) {
    r.source_rate = j.at("source_rate").get<double>();
    r.target_rate = j.at("target_rate").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.source_duration_s = j.at("source_duration_s").get<double>();
    r.output_duration_s = j.at("output_duration_s").get<double>();
    r.jnd_threshold = j.value("jnd_threshold", 0.05);
    r.warnings = j.value("warnings", std::vector<std::string>{});
    r.target_duration_s = get_optional<double>(j, "target_duration_s");
    r.norm_duration_diff = get_optional<double>(j, "norm_duration_diff");
    r.within_jnd = get_optional<bool>(j, "within_jnd");
    r.rate_errors = get_optional<RateErrorReport>(j, "rate_errors");
    r.boundary_metrics = get_optional<BoundaryMetrics>(j, "boundary_metrics");
}

void to_json(json& j, const ConversionJob& job) {
    j = json{{"id", job.id},
             {"speaker", job.speaker},
             {"target_speaker", job.target_speaker},
             {"source_wav", job.source_wav.string()},
             {"mode", std::string(to_string(job.mode))},
             {"output_wav", job.output_wav.string()}};
    put_path(j, "target_wav", job.target_wav);
    put_optional(j, "target_rate", job.target_rate);
    put_path(j, "source_alignment", job.source_alignment);
    put_path(j, "target_alignment", job.target_alignment);
    put_path(j, "parallel_target_wav", job.parallel_target_wav);
    put_optional(j, "target_duration_s", job.target_duration_s);
    put_path(j, "predicted_curve", job.predicted_curve);
}

void from_json(const json& j, ConversionJob& job) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "manifest entry is not a JSON object");
    job.id = j.value("id", std::string{});
    job.speaker = j.value("speaker", std::string{});
    job.target_speaker = j.value("target_speaker", std::string{});
    job.source_wav = j.at("source_wav").get<std::string>();
    job.output_wav = j.at("output_wav").get<std::string>();
    job.mode = parse_rate_mode(j.value("mode", std::string("aligned")));
    job.target_wav = get_path(j, "target_wav");
    job.target_rate = get_optional<double>(j, "target_rate");
    job.source_alignment = get_path(j, "source_alignment");
    job.target_alignment = get_path(j, "target_alignment");
    job.parallel_target_wav = get_path(j, "parallel_target_wav");
    job.target_duration_s = get_optional<double>(j, "target_duration_s");
    job.predicted_curve = get_path(j, "predicted_curve");
}

// ---------------------------------------------------------------------------
// Batch evaluation

std::vector<ConversionJob> parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
    auto resolve = [&](std::filesystem::path& p) {
        if (!p.empty() && p.is_relative() && !base_dir.empty()) p = base_dir / p;
    };
    auto resolve_opt = [&](std::optional<std::filesystem::path>& p) {
        if (p) resolve(*p);
    };

    std::vector<ConversionJob> jobs;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ConversionJob job;
        try {
            json::parse(line).get_to(job);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, "manifest line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, "manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        resolve(job.source_wav);
        resolve(job.output_wav);
        resolve_opt(job.target_wav);
        resolve_opt(job.source_alignment);
        resolve_opt(job.target_alignment);
        resolve_opt(job.parallel_target_wav);
        resolve_opt(job.predicted_curve);
        if (job.id.empty()) job.id = std::to_string(jobs.size());
        jobs.push_back(std::move(job));
    }
    return jobs;
}

namespace {

json aggregate_of(const std::vector<JobOutcome>& outcomes) {
    std::vector<double> abs_diff;
    std::vector<double> in_jnd;
    std::vector<double> e_cp;
    std::vector<double> rel;
    std::vector<double> f1;
    std::vector<double> r_value;
    std::size_t failed = 0;
    for (const auto& o : outcomes) {
        if (!o.report) {
            ++failed;
            continue;
        }
        const auto& r = *o.report;
        if (r.norm_duration_diff) {
            abs_diff.push_back(std::abs(*r.norm_duration_diff));
            in_jnd.push_back(r.within_jnd.value_or(false) ? 1.0 : 0.0);
        }
        if (r.rate_errors) {
            e_cp.push_back(r.rate_errors->e_cp);
            rel.push_back(r.rate_errors->rel_error);
        }
        if (r.boundary_metrics) {
            f1.push_back(r.boundary_metrics->f1);
            r_value.push_back(r.boundary_metrics->r_value);
        }
    }
    return json{{"jobs", outcomes.size()},
                {"failed", failed},
                {"mean_abs_norm_duration_diff", mean_or_null(abs_diff)},
                {"fraction_within_jnd", mean_or_null(in_jnd)},
                {"mean_e_cp", mean_or_null(e_cp)},
                {"mean_rel_error", mean_or_null(rel)},
                {"mean_boundary_f1", mean_or_null(f1)},
                {"mean_boundary_r_value", mean_or_null(r_value)}};
}

// Ranks speakers by mean phoneme rate and splits them into slow / normal / fast thirds.
json speakers_of(const std::vector<JobOutcome>& outcomes) {
    std::map<std::string, std::vector<double>> rates;
    for (const auto& o : outcomes) {
        if (!o.report) continue;
        if (!o.job.speaker.empty()) rates[o.job.speaker].push_back(o.report->source_rate);
        if (!o.job.target_speaker.empty()) rates[o.job.target_speaker].push_back(o.report->target_rate);
    }
    std::vector<std::pair<std::string, double>> ranked;
    for (const auto& [speaker, values] : rates) {
        double sum = 0.0;
        for (const double v : values) sum += v;
        ranked.emplace_back(speaker, sum / static_cast<double>(values.size()));
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second < b.second; });

    static constexpr const char* kSplits[] = {"slow", "normal", "fast"};
    json out = json::array();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        out.push_back({{"speaker", ranked[i].first},
                       {"mean_rate", ranked[i].second},
                       {"utterances", rates[ranked[i].first].size()},
                       {"split", kSplits[3 * i / ranked.size()]}});
    }
    return out;
}

}  // namespace

BatchReport run_batch(const std::vector<ConversionJob>& jobs, const ConvertOptions& options, unsigned threads) {
    BatchReport batch;
    batch.jobs.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            auto& outcome = batch.jobs[i];
            outcome.index = i;
            outcome.job = jobs[i];
            try {
                outcome.report = convert(jobs[i], options);
            } catch (const std::exception& e) {
                outcome.error = e.what();
            }
        }
    };
    threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size()))));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    batch.aggregate = aggregate_of(batch.jobs);
    batch.speakers = speakers_of(batch.jobs);
    return batch;
}

json to_json(const BatchReport& report) {
    json jobs = json::array();
    for (const auto& o : report.jobs) {
        json entry{{"index", o.index}, {"id", o.job.id}, {"job", o.job}, {"ok", o.report.has_value()}};
        entry["report"] = o.report ? json(*o.report) : json(nullptr);
        entry["error"] = o.report ? json(nullptr) : json(o.error);
        jobs.push_back(std::move(entry));
    }
    return json{{"schema", kReportSchema}, {"jobs", jobs}, {"aggregate", report.aggregate}, {"speakers", report.speakers}};
}

json batch_evaluate(const std::filesystem::path& manifest, const std::filesystem::path& output,
                    const ConvertOptions& options, unsigned threads) {
    std::ifstream in(manifest);
    if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + manifest.string());
    std::ostringstream text;
    text << in.rdbuf();
    const auto jobs = parse_manifest(text.str(), manifest.parent_path());
    const auto summary = to_json(run_batch(jobs, options, threads));

    std::ofstream out(output, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + output.string() + " for writing");
    out << summary.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + output.string());
    return summary;
}

}  // namespace srate
