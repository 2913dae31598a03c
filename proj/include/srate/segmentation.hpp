#pragma once

#include "srate/audio.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace srate {

/// Fixed-dimension frame vectors. Frame t is centered at origin_s + t * hop_s.
class FeatureSequence {
public:
    FeatureSequence() = default;
    FeatureSequence(std::vector<double> data, std::size_t dim, double hop_s, double origin_s = 0.0);

    std::size_t frame_count() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::size_t dim() const noexcept { return dim_; }
    double hop_s() const noexcept { return hop_s_; }
    double origin_s() const noexcept { return origin_s_; }
    std::span<const double> frame(std::size_t t) const noexcept { return {data_.data() + t * dim_, dim_}; }
    std::span<const double> data() const noexcept { return data_; }

private:
    std::vector<double> data_;
    std::size_t dim_ = 0;
    double hop_s_ = 0.01;
    double origin_s_ = 0.0;
};

/// One score per adjacent frame pair; value t sits at origin_s + t * hop_s.
struct ScoreCurve {
    std::vector<double> values;
    double hop_s = 0.01;
    double origin_s = 0.0;

    double time_at(std::size_t t) const noexcept { return origin_s + static_cast<double>(t) * hop_s; }
};

/// Strictly increasing, non-negative boundary times.
struct BoundaryList {
    std::vector<double> times_s;
};

struct BoundaryMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double r_value = 0.0;
    double tolerance_s = 0.02;
    std::size_t matches = 0;
    std::size_t predicted = 0;
    std::size_t reference = 0;

    friend bool operator==(const BoundaryMetrics&, const BoundaryMetrics&) = default;
};

enum class FeatureNormalization {
    mean_variance,  // per-dimension (x - mean) / std
    variance,       // per-dimension x / std; keeps the stationary component
};

struct FeatureParams {
    double frame_s = 0.025;
    double hop_s = 0.010;
    std::size_t n_mels = 40;
    std::size_t n_coeffs = 13;
    FeatureNormalization normalization = FeatureNormalization::mean_variance;
    // Mel energies are floored this far below the utterance's loudest band.
    double log_floor_db = 80.0;
};

/// MFCC-style frames: Hann window, magnitude spectrum, triangular Mel bank, log,
/// DCT-II coefficients 1..n_coeffs, then per-utterance normalization.
FeatureSequence frame_features(const AudioBuffer& buffer, const FeatureParams& params = {});

/// score[t] = 1 - cos(frame[t], frame[t+1]), clamped to [0, 2], placed midway between the frames.
ScoreCurve dissimilarity_curve(const FeatureSequence& features);

/// Interior local maxima whose topographic prominence is at least `prominence`.
/// Peaks closer than min_separation_s are thinned, keeping the higher one (earlier on ties).
BoundaryList detect_boundaries(const ScoreCurve& curve, double prominence, double min_separation_s);

/// Topographic prominence of the sample at `peak` (height above the higher of its two bases).
double peak_prominence(std::span<const double> values, std::size_t peak);

struct SegmentationParams {
    FeatureParams features{.normalization = FeatureNormalization::variance};
    double relative_prominence = 0.1;  // fraction of the curve maximum
    double min_prominence = 0.05;      // absolute floor on the prominence threshold
    double min_separation_s = 0.040;
    bool use_vad = true;
    VadParams vad;
};

/// Boundaries of the speech span of `buffer` (the whole buffer when VAD is off), in buffer time.
BoundaryList segment_unsupervised(const AudioBuffer& buffer, const SegmentationParams& params = {});

/// Number of interior boundaries found by segment_unsupervised.
std::size_t count_phonemes_unsupervised(const AudioBuffer& buffer, const SegmentationParams& params = {});

/// Greedy one-to-one matching in time order: each reference boundary takes the earliest
/// unmatched prediction within tolerance.
std::size_t count_boundary_matches(std::span<const double> predicted, std::span<const double> reference,
                                   double tolerance_s);

BoundaryMetrics boundary_metrics(const BoundaryList& predicted, const BoundaryList& reference,
                                 double tolerance_s = 0.02);

/// Feature file: three little-endian uint32 (frame count, dimension, hop in microseconds)
/// followed by frame-major little-endian float32 values.
FeatureSequence read_features(const std::filesystem::path& path);
void write_features(const FeatureSequence& features, const std::filesystem::path& path);

}  // namespace srate
