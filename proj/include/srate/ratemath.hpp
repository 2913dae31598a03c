#pragma once

#include "srate/alignment.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace srate {

/// A phoneme-rate signal (phonemes/second) on a uniform grid:
/// index n sits at origin_s + n * grid_step_s.
class RateCurve {
public:
    RateCurve() = default;
    RateCurve(std::vector<double> values, double grid_step_s, double origin_s = 0.0);

    std::span<const double> values() const noexcept { return values_; }
    double grid_step_s() const noexcept { return grid_step_s_; }
    double origin_s() const noexcept { return origin_s_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double time_at(std::size_t n) const noexcept { return origin_s_ + static_cast<double>(n) * grid_step_s_; }
    double operator[](std::size_t n) const noexcept { return values_[n]; }

    friend bool operator==(const RateCurve&, const RateCurve&) = default;

private:
    std::vector<double> values_;
    double grid_step_s_ = 0.01;
    double origin_s_ = 0.0;
};

struct RateErrorReport {
    double e_cp = 0.0;       // |predicted - true| phoneme count
    double rel_error = 0.0;  // e_cp / true count
    std::optional<double> pearson_r;

    friend bool operator==(const RateErrorReport&, const RateErrorReport&) = default;
};

inline constexpr double kDefaultGridStep_s = 0.010;
inline constexpr double kDefaultSmoothingWindow_s = 0.625;
inline constexpr double kMinimumRate = 1e-6;

/// Step function of the inverse phoneme duration, sampled on a grid anchored at t = 0.
///
/// Grid point n belongs to phoneme i when S_i <= n*h < S_{i+1} (half-open), so no
/// point is claimed twice. Silence and gaps read 0. The curve ends at the last
/// segment end.
RateCurve instantaneous_rate(const PhonemeAlignment& alignment, double grid_step_s = kDefaultGridStep_s);

/// Exact integral of the instantaneous rate: each phoneme contributes width * (1/width).
double analytic_integral(const PhonemeAlignment& alignment) noexcept;

/// Riemann sum grid_step_s * sum(values); recovers a phoneme count from a rate curve.
double grid_integral(const RateCurve& curve) noexcept;

/// Hann-kernel length used by local_rate: round(window_s / grid_step_s), bumped to odd.
std::size_t smoothing_kernel_size(double window_s, double grid_step_s);

/// Local phoneme rate: normalized Hann-weighted average of the curve with the
/// kernel centered on each point and zeros beyond both ends. Same grid as the input.
RateCurve local_rate(const RateCurve& curve, double window_s = kDefaultSmoothingWindow_s);

/// Tempo factor target_rate / source_rate; > 1 shortens the source.
double interpolation_factor(double source_rate, double target_rate);

RateErrorReport rate_errors(double predicted_count, std::size_t true_count);

double pearson_r(std::span<const double> a, std::span<const double> b);
double pearson_r(const RateCurve& a, const RateCurve& b);

/// Scores a predicted local-rate curve against the reference built from an alignment:
/// Pearson r against local_rate(instantaneous_rate(alignment)) and the count
/// recovered by integrating the prediction over its full length, silence included.
/// The prediction must share the reference grid.
RateErrorReport evaluate_rate_prediction(const RateCurve& predicted, const PhonemeAlignment& alignment,
                                         double window_s = kDefaultSmoothingWindow_s);

RateCurve read_rate_curve(const std::filesystem::path& path, double grid_step_s);
void write_rate_curve(const RateCurve& curve, std::ostream& out);

}  // namespace srate
