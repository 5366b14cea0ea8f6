#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/inference.hpp"

using namespace spdc;
using namespace spdc::fit;

namespace {

// Composite Simpson average of exp(-rate |t|) over [lo, hi], split at zero.
double simpson_average(double rate, double lo, double hi) {
  auto integrate = [&](double a, double b) {
    if (b <= a) return 0.0;
    const int n = 2000;
    const double h = (b - a) / n;
    double s = std::exp(-rate * std::abs(a)) + std::exp(-rate * std::abs(b));
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * std::exp(-rate * std::abs(a + i * h));
    return s * h / 3.0;
  };
  const double total = lo < 0.0 && hi > 0.0 ? integrate(lo, 0.0) + integrate(0.0, hi) : integrate(lo, hi);
  return total / (hi - lo);
}

corr::G2Curve synthetic(double a, double rate, double b, double bin, int half, bool binned) {
  corr::G2Curve c;
  c.bin_width = binned ? bin : 0.0;
  for (int k = -half; k <= half; ++k) {
    const double tau = k * bin;
    const double shape = binned ? simpson_average(rate, tau - bin / 2, tau + bin / 2) : std::exp(-rate * std::abs(tau));
    c.tau.push_back(tau);
    c.g2.push_back(b + a * shape);
    c.sigma.push_back(0.01);
    c.counts.push_back(100);
  }
  return c;
}

}  // namespace

TEST(BinAveragedExp, MatchesNumericIntegration) {
  const double rate = 2 * std::numbers::pi * 13e6;
  for (auto [lo, hi] : {std::pair{-1.5e-9, 1.5e-9}, std::pair{1.5e-9, 4.5e-9}, std::pair{-40e-9, -37e-9},
                        std::pair{-0.2e-9, 2.8e-9}, std::pair{0.0, 3e-9}}) {
    EXPECT_NEAR(bin_averaged_exp(rate, lo, hi), simpson_average(rate, lo, hi), 1e-10) << lo << " " << hi;
  }
  EXPECT_DOUBLE_EQ(bin_averaged_exp(rate, 1e-9, 1e-9), std::exp(-rate * 1e-9));
}

TEST(FitExponential, RecoversPointModelExactly) {
  const double rate = 2 * std::numbers::pi * 13e6;
  const auto curve = synthetic(1.3, rate, 1.0, 3e-9, 50, false);
  const ExpFit f = fit_exponential(curve);
  EXPECT_TRUE(f.converged);
  EXPECT_EQ(f.model, ExpModel::Point);
  EXPECT_NEAR(f.amplitude, 1.3, 1e-8);
  EXPECT_NEAR(f.decay_rate / rate, 1.0, 1e-8);
  EXPECT_NEAR(f.baseline, 1.0, 1e-9);
  EXPECT_LT(f.chi2, 1e-10);
  EXPECT_EQ(f.dof, 101u - 3u);
  EXPECT_NEAR(bandwidth_from_fit(f), 13e6, 1e-2);
}

TEST(FitExponential, RecoversBinAveragedModel) {
  const double rate = 2 * std::numbers::pi * 30e6;  // bin comparable to the decay time
  const auto curve = synthetic(0.8, rate, 1.0, 3e-9, 40, true);
  const ExpFit f = fit_exponential(curve);
  EXPECT_EQ(f.model, ExpModel::BinAveraged);
  EXPECT_NEAR(f.amplitude, 0.8, 1e-6);
  EXPECT_NEAR(f.decay_rate / rate, 1.0, 1e-6);
  EXPECT_NEAR(f.baseline, 1.0, 1e-8);
  // The point model misreads the same data.
  FitOptions point;
  point.model = ExpModel::Point;
  const ExpFit p = fit_exponential(curve, point);
  EXPECT_GT(std::abs(p.amplitude - 0.8), 1e-3);
}

TEST(FitExponential, FixedBaselineAndExcludeCenter) {
  const double rate = 1e8;
  auto curve = synthetic(2.0, rate, 1.0, 2e-9, 30, false);
  curve.g2[30] = 50.0;  // corrupt the zero bin
  FitOptions opts;
  opts.fix_baseline = 1.0;
  opts.exclude_center = true;
  const ExpFit f = fit_exponential(curve, opts);
  EXPECT_TRUE(f.baseline_fixed);
  EXPECT_EQ(f.baseline, 1.0);
  EXPECT_EQ(f.covariance[2][2], 0.0);
  EXPECT_NEAR(f.amplitude, 2.0, 1e-8);
  EXPECT_NEAR(f.decay_rate, rate, 1e-8 * rate);
  EXPECT_EQ(f.dof, 60u - 2u);
}

TEST(FitExponential, CovarianceScalesWithSigma) {
  const double rate = 2 * std::numbers::pi * 13e6;
  auto c1 = synthetic(1.0, rate, 1.0, 3e-9, 50, false);
  auto c2 = c1;
  for (double& s : c2.sigma) s *= 2.0;
  const ExpFit f1 = fit_exponential(c1);
  const ExpFit f2 = fit_exponential(c2);
  EXPECT_NEAR(f2.decay_rate_sigma() / f1.decay_rate_sigma(), 2.0, 1e-6);
  EXPECT_NEAR(f2.peak_sigma() / f1.peak_sigma(), 2.0, 1e-6);
  EXPECT_GT(f1.decay_rate_sigma(), 0.0);
}

TEST(FitExponential, Errors) {
  const auto few = synthetic(1.0, 1e8, 1.0, 3e-9, 3, false);  // 7 bins
  EXPECT_THROW(fit_exponential(few), ContractError);
  auto flat = synthetic(0.0, 1e8, 1.0, 3e-9, 20, false);
  for (std::size_t i = 0; i < flat.size(); ++i) flat.g2[i] = 1.0 - 0.01 * std::exp(-std::abs(flat.tau[i]) * 1e8);
  FitOptions unit;
  unit.fix_baseline = 1.0;
  EXPECT_THROW(fit_exponential(flat, unit), NumericalError);
  auto inf_sigma = synthetic(1.0, 1e8, 1.0, 3e-9, 20, false);
  for (std::size_t i = 0; i < 35; ++i) inf_sigma.sigma[i] = HUGE_VAL;
  EXPECT_THROW(fit_exponential(inf_sigma), ContractError);
  auto no_width = synthetic(1.0, 1e8, 1.0, 3e-9, 20, false);
  FitOptions binned;
  binned.model = ExpModel::BinAveraged;
  EXPECT_THROW(fit_exponential(no_width, binned), ConfigError);
}

TEST(Inversions, PairRateAndModes) {
  ExpFit f;
  f.decay_rate = 2 * std::numbers::pi * 13e6;
  f.amplitude = f.decay_rate / (2 * 1e5);
  EXPECT_DOUBLE_EQ(pair_rate_from_peak(f), 1e5);
  EXPECT_NEAR(effective_modes(1.35), 1.0 / 0.35, 1e-12);
  EXPECT_NEAR(effective_modes(1.35), 2.857, 1e-3);
  EXPECT_DOUBLE_EQ(effective_modes(2.0), 1.0);
  EXPECT_THROW(effective_modes(1.0), NumericalError);
  EXPECT_THROW(effective_modes(0.5), NumericalError);
}

TEST(EstimateSource, CombinesCrossAndAuto) {
  ExpFit cross;
  cross.decay_rate = 1e8;
  cross.amplitude = 1e8 / 2e5;
  cross.baseline = 1.0;
  ExpFit autoc;
  autoc.decay_rate = 0.5e8;
  autoc.amplitude = 0.5;
  autoc.baseline = 1.0;
  const SourceEstimate e = estimate_source(cross, &autoc);
  EXPECT_DOUBLE_EQ(e.pair_rate_hz, 1e5);
  EXPECT_DOUBLE_EQ(e.bandwidth_hz, 1e8 / (2 * std::numbers::pi));
  ASSERT_TRUE(e.decay_ratio.has_value());
  EXPECT_DOUBLE_EQ(*e.decay_ratio, 2.0);
  ASSERT_TRUE(e.n_modes_effective.has_value());
  EXPECT_DOUBLE_EQ(*e.n_modes_effective, 2.0);
  EXPECT_FALSE(estimate_source(cross).decay_ratio.has_value());
}

TEST(PumpConversionFit, ExactLine) {
  std::vector<PumpPoint> pts;
  for (double p : {0.25, 0.5, 0.75, 1.0}) pts.push_back({p, 3.0 + 400.0 * p, std::nullopt});
  const LinearFit f = pump_conversion_fit(pts);
  EXPECT_NEAR(f.slope, 400.0, 1e-9);
  EXPECT_NEAR(f.intercept, 3.0, 1e-9);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(f.slope_sigma, 0.0, 1e-6);
  EXPECT_NEAR(f.inferred_pair_rate_per_mw, 400.0 / kPairDetectionEfficiency, 1e-6);
}

TEST(PumpConversionFit, SigmaPropagation) {
  // Known OLS standard errors with equal sigmas s: var(slope) = s^2 / Sxx.
  std::vector<PumpPoint> pts;
  const double s = 2.0;
  const std::vector<double> xs{1, 2, 3, 4};
  const std::vector<double> noise{0.3, -0.1, -0.4, 0.2};
  for (std::size_t i = 0; i < xs.size(); ++i) pts.push_back({xs[i], 10.0 * xs[i] + noise[i], s});
  const LinearFit f = pump_conversion_fit(pts, 1.0);
  const double sxx = 5.0;  // sum (x - 2.5)^2
  EXPECT_NEAR(f.slope_sigma, s / std::sqrt(sxx), 1e-12);
  EXPECT_NEAR(f.intercept_sigma, s * std::sqrt(1.0 / 4 + 2.5 * 2.5 / sxx), 1e-12);
  EXPECT_DOUBLE_EQ(f.inferred_pair_rate_per_mw, f.slope);
}

TEST(PumpConversionFit, Errors) {
  std::vector<PumpPoint> two{{1, 1, {}}, {2, 2, {}}};
  EXPECT_THROW(pump_conversion_fit(two), NumericalError);
  std::vector<PumpPoint> same{{1, 1, {}}, {1, 2, {}}, {1, 3, {}}};
  EXPECT_THROW(pump_conversion_fit(same), NumericalError);
}
