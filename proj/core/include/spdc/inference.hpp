#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include "spdc/correlator.hpp"

namespace spdc::fit {

/// How the exponential is compared with each bin.
enum class ExpModel {
  Auto,         ///< BinAveraged when the curve records a bin width, else Point
  Point,        ///< B + A exp(-lambda |tau|) at the bin centre
  BinAveraged,  ///< the same model averaged over each bin
};

struct FitOptions {
  std::optional<double> fix_baseline;
  bool exclude_center = false;  ///< drop the tau = 0 bin (start-stop histograms)
  ExpModel model = ExpModel::Auto;
  int max_iterations = 200;
};

/// Weighted least-squares fit of B + A exp(-lambda |tau|).
struct ExpFit {
  double amplitude = 0.0;
  double decay_rate = 0.0;  ///< lambda, 1/s
  double baseline = 1.0;
  /// Parameter covariance, order (amplitude, decay_rate, baseline). A fixed
  /// baseline has zero variance.
  std::array<std::array<double, 3>, 3> covariance{};
  double residual_norm = 0.0;  ///< sqrt(chi^2)
  double chi2 = 0.0;
  std::size_t dof = 0;
  int iterations = 0;
  bool converged = false;
  bool baseline_fixed = false;
  ExpModel model = ExpModel::Point;  ///< resolved model actually used
  double bin_width = 0.0;

  /// Point model value, independent of how bins were treated in the fit.
  double value(double tau) const noexcept;
  double peak() const noexcept { return baseline + amplitude; }
  double peak_sigma() const noexcept;
  double decay_rate_sigma() const noexcept;
  double decay_time() const noexcept { return 1.0 / decay_rate; }
  double reduced_chi2() const noexcept { return dof > 0 ? chi2 / static_cast<double>(dof) : 0.0; }
};

/// Throws ContractError with fewer than 8 usable bins (finite, positive sigma),
/// NumericalError when the fit does not converge or the fitted amplitude is
/// negative (no peak).
ExpFit fit_exponential(const corr::G2Curve& curve, const FitOptions& options = {});

/// Bin-averaged exp(-lambda |tau|) over [lo, hi].
double bin_averaged_exp(double decay_rate, double lo, double hi) noexcept;

/// decay_rate / 2 pi.
double bandwidth_from_fit(const ExpFit& fit) noexcept;

/// Inverts g2_si(0) - 1 = gamma / (2 R): R = decay_rate / (2 A).
double pair_rate_from_peak(const ExpFit& fit);

/// n = 1 / (g2(0) - 1); throws NumericalError for g2(0) <= 1.
double effective_modes(double g2_zero);

inline constexpr double kApdEfficiency = 0.075;
inline constexpr double kPairDetectionEfficiency = kApdEfficiency * kApdEfficiency;

struct PumpPoint {
  double pump_power = 0.0;        ///< mW
  double coincidence_rate = 0.0;  ///< 1/s
  std::optional<double> sigma;    ///< standard error of the rate
};

struct LinearFit {
  double slope = 0.0;      ///< coincidences/s per mW
  double intercept = 0.0;  ///< coincidences/s
  double slope_sigma = 0.0;
  double intercept_sigma = 0.0;
  double r_squared = 0.0;
  double pair_efficiency = kPairDetectionEfficiency;
  double inferred_pair_rate_per_mw = 0.0;  ///< slope / pair_efficiency
};

/// Ordinary least-squares line through (power, rate). Parameter errors use
/// the supplied per-point sigmas when every point has one, and the residual
/// scatter otherwise.
LinearFit pump_conversion_fit(std::span<const PumpPoint> points,
                              double pair_efficiency = kPairDetectionEfficiency);

struct SourceEstimate {
  double bandwidth_hz = 0.0;
  double pair_rate_hz = 0.0;
  std::optional<double> n_modes_effective;
  std::optional<double> decay_ratio;  ///< auto decay time / cross decay time
};

SourceEstimate estimate_source(const ExpFit& cross, const ExpFit* autocorrelation = nullptr);

}  // namespace spdc::fit
