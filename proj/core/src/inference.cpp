#include "spdc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "spdc/error.hpp"

namespace spdc::fit {
namespace {

constexpr std::size_t kMinBins = 8;

struct Sample {
  double tau;
  double lo;  // bin interval for the averaged model
  double hi;
  double y;
  double weight;
};

// exp(-lambda |tau|) and its lambda-derivative, point or bin-averaged.
struct Shape {
  double value;
  double d_rate;
};

Shape point_shape(double rate, double tau) noexcept {
  const double e = std::exp(-rate * std::abs(tau));
  return {e, -std::abs(tau) * e};
}

Shape binned_shape(double rate, double lo, double hi) noexcept {
  const double width = hi - lo;
  if (lo < 0.0 && hi > 0.0) {
    const double left = -std::expm1(rate * lo);   // 1 - e^{rate lo}
    const double right = -std::expm1(-rate * hi);  // 1 - e^{-rate hi}
    const double g = (left + right) / (rate * width);
    const double dg = (-lo * std::exp(rate * lo) + hi * std::exp(-rate * hi)) / (rate * width) - g / rate;
    return {g, dg};
  }
  const double near = lo >= 0.0 ? lo : -hi;
  const double far = lo >= 0.0 ? hi : -lo;
  const double e_near = std::exp(-rate * near);
  const double e_far = std::exp(-rate * far);
  const double g = -e_near * std::expm1(-rate * (far - near)) / (rate * width);
  const double dg = (-near * e_near + far * e_far) / (rate * width) - g / rate;
  return {g, dg};
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double upper = v[mid];
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// Solves M x = b in place (n <= 3) with partial pivoting; false when singular.
bool solve(std::array<std::array<double, 3>, 3> m, std::array<double, 3>& b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (!(std::abs(m[pivot][col]) > 0.0) || !std::isfinite(m[pivot][col])) return false;
    std::swap(m[pivot], m[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= m[i][c] * b[c];
    b[i] = s / m[i][i];
  }
  return true;
}

class ExpProblem {
 public:
  ExpProblem(std::vector<Sample> samples, bool binned, std::optional<double> fixed)
      : samples_(std::move(samples)), binned_(binned), fixed_(fixed) {}

  std::size_t free_params() const noexcept { return fixed_ ? 2 : 3; }

  Shape shape(double rate, const Sample& s) const noexcept {
    return binned_ ? binned_shape(rate, s.lo, s.hi) : point_shape(rate, s.tau);
  }

  // p = (A, lambda, B)
  double chi2(const std::array<double, 3>& p) const noexcept {
    double total = 0.0;
    for (const Sample& s : samples_) {
      const double r = s.y - (p[2] + p[0] * shape(p[1], s).value);
      total += s.weight * r * r;
    }
    return total;
  }

  // Normal matrix J^T W J and gradient J^T W r over the free parameters,
  // with lambda measured in units of `scale`.
  void normal_equations(const std::array<double, 3>& p, double scale, std::array<std::array<double, 3>, 3>& h,
                        std::array<double, 3>& g) const noexcept {
    h = {};
    g = {};
    const std::size_t n = free_params();
    for (const Sample& s : samples_) {
      const Shape e = shape(p[1], s);
      const double r = s.y - (p[2] + p[0] * e.value);
      const std::array<double, 3> j{e.value, p[0] * e.d_rate * scale, 1.0};
      for (std::size_t a = 0; a < n; ++a) {
        g[a] += s.weight * j[a] * r;
        for (std::size_t b = 0; b < n; ++b) h[a][b] += s.weight * j[a] * j[b];
      }
    }
  }

  std::size_t size() const noexcept { return samples_.size(); }

 private:
  std::vector<Sample> samples_;
  bool binned_;
  std::optional<double> fixed_;
};

struct Guess {
  double amplitude;
  double rate;
  double baseline;
};

Guess initial_guess(const std::vector<Sample>& samples, std::optional<double> fixed, double spacing) {
  double max_abs = 0.0;
  for (const Sample& s : samples) max_abs = std::max(max_abs, std::abs(s.tau));

  double baseline = 0.0;
  if (fixed) {
    baseline = *fixed;
  } else {
    std::vector<double> outer;
    for (const Sample& s : samples) {
      if (std::abs(s.tau) >= 0.75 * max_abs) outer.push_back(s.y);
    }
    baseline = median(outer);
  }
  double peak = samples.front().y;
  for (const Sample& s : samples) peak = std::max(peak, s.y);
  const double amplitude = peak - baseline;
  if (!(amplitude > 0.0)) throw NumericalError("fit shape error: curve has no peak above its baseline");

  // Log-linear regression on the upper half of the peak.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const Sample& s : samples) {
    const double excess = s.y - baseline;
    if (excess > 0.5 * amplitude) {
      const double x = std::abs(s.tau);
      const double y = std::log(excess);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++n;
    }
  }
  double rate = 0.0;
  const double det = static_cast<double>(n) * sxx - sx * sx;
  if (n >= 2 && det > 0.0) rate = -(static_cast<double>(n) * sxy - sx * sy) / det;
  if (!(rate > 0.0) || !std::isfinite(rate)) rate = std::numbers::ln2 / (0.5 * spacing);
  return {amplitude, rate, baseline};
}

}  // namespace

double bin_averaged_exp(double decay_rate, double lo, double hi) noexcept {
  if (!(hi > lo)) return std::exp(-decay_rate * std::abs(lo));
  return binned_shape(decay_rate, lo, hi).value;
}

double ExpFit::value(double tau) const noexcept { return baseline + amplitude * std::exp(-decay_rate * std::abs(tau)); }

double ExpFit::peak_sigma() const noexcept {
  const double v = covariance[0][0] + covariance[2][2] + 2.0 * covariance[0][2];
  return std::sqrt(std::max(v, 0.0));
}

double ExpFit::decay_rate_sigma() const noexcept { return std::sqrt(std::max(covariance[1][1], 0.0)); }

ExpFit fit_exponential(const corr::G2Curve& curve, const FitOptions& options) {
  const bool binned = options.model == ExpModel::BinAveraged ||
                      (options.model == ExpModel::Auto && curve.bin_width > 0.0);
  if (binned && !(curve.bin_width > 0.0)) {
    throw ConfigError("bin-averaged fit requested for a curve without a bin width");
  }

  std::vector<Sample> samples;
  double spacing = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double sigma = curve.sigma[i];
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(curve.g2[i])) continue;
    if (options.exclude_center) {
      const double half = curve.bin_width > 0.0 ? 0.5 * curve.bin_width : 0.0;
      if (std::abs(curve.tau[i]) <= half * (1.0 + 1e-9)) continue;
    }
    const bool has_edges = curve.bin_lo.size() == curve.size() && curve.bin_hi.size() == curve.size();
    const double lo = has_edges ? curve.bin_lo[i] : curve.tau[i] - 0.5 * curve.bin_width;
    const double hi = has_edges ? curve.bin_hi[i] : curve.tau[i] + 0.5 * curve.bin_width;
    if (binned && !(hi > lo)) continue;
    samples.push_back({curve.tau[i], lo, hi, curve.g2[i], 1.0 / (sigma * sigma)});
  }
  if (samples.size() < kMinBins) {
    throw ContractError("exponential fit needs at least 8 bins with finite errors, got " +
                        std::to_string(samples.size()));
  }
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double d = std::abs(curve.tau[i] - curve.tau[i - 1]);
    if (d > 0.0 && (spacing == 0.0 || d < spacing)) spacing = d;
  }

  const Guess guess = initial_guess(samples, options.fix_baseline, spacing);
  const double scale = guess.rate;  // lambda is fitted in units of the initial guess
  ExpProblem problem(std::move(samples), binned, options.fix_baseline);
  const std::size_t n_free = problem.free_params();

  std::array<double, 3> p{guess.amplitude, guess.rate, guess.baseline};
  double chi2 = problem.chi2(p);
  double damping = 1e-3;
  bool converged = false;
  int iter = 0;
  std::array<std::array<double, 3>, 3> h{};
  std::array<double, 3> g{};
  for (; iter < options.max_iterations && !converged; ++iter) {
    problem.normal_equations(p, scale, h, g);
    bool accepted = false;
    while (!accepted) {
      auto damped = h;
      for (std::size_t a = 0; a < n_free; ++a) damped[a][a] *= 1.0 + damping;
      std::array<double, 3> step = g;
      if (!solve(damped, step, n_free)) {
        damping *= 10.0;
      } else {
        std::array<double, 3> trial{p[0] + step[0], p[1] + step[1] * scale, n_free == 3 ? p[2] + step[2] : p[2]};
        const double trial_chi2 = trial[1] > 0.0 ? problem.chi2(trial) : HUGE_VAL;
        if (trial_chi2 <= chi2) {
          const double change = std::max({std::abs(step[0]) / (std::abs(p[0]) + 1e-300),
                                          std::abs(step[1] * scale) / p[1],
                                          n_free == 3 ? std::abs(step[2]) / (std::abs(p[2]) + 1e-12) : 0.0});
          const double improvement = chi2 - trial_chi2;
          p = trial;
          chi2 = trial_chi2;
          damping = std::max(damping / 10.0, 1e-12);
          accepted = true;
          if (change < 1e-12 || improvement <= 1e-15 * std::max(chi2, 1e-300)) converged = true;
        } else {
          damping *= 10.0;
        }
      }
      // No downhill step at any damping: already at the minimum to precision.
      if (!accepted && damping > 1e14) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "exponential fit did not converge after " << iter << " iterations (A=" << p[0]
        << ", lambda=" << p[1] << ", B=" << p[2] << ", chi2=" << chi2 << ")";
    throw NumericalError(msg.str());
  }
  if (p[0] < 0.0) throw NumericalError("fit shape error: fitted amplitude is negative");

  ExpFit fit;
  fit.amplitude = p[0];
  fit.decay_rate = p[1];
  fit.baseline = p[2];
  fit.chi2 = chi2;
  fit.residual_norm = std::sqrt(chi2);
  fit.dof = problem.size() - n_free;
  fit.iterations = iter;
  fit.converged = true;
  fit.baseline_fixed = options.fix_baseline.has_value();
  fit.model = binned ? ExpModel::BinAveraged : ExpModel::Point;
  fit.bin_width = curve.bin_width;

  // Covariance = (J^T W J)^{-1}, mapped back from the scaled decay rate.
  problem.normal_equations(p, scale, h, g);
  for (std::size_t col = 0; col < n_free; ++col) {
    std::array<double, 3> e{};
    e[col] = 1.0;
    if (!solve(h, e, n_free)) throw NumericalError("fit covariance is singular");
    for (std::size_t row = 0; row < n_free; ++row) {
      const double sr = row == 1 ? scale : 1.0;
      const double sc = col == 1 ? scale : 1.0;
      fit.covariance[row][col] = e[row] * sr * sc;
    }
  }
  return fit;
}

double bandwidth_from_fit(const ExpFit& fit) noexcept { return fit.decay_rate / (2.0 * std::numbers::pi); }

double pair_rate_from_peak(const ExpFit& fit) {
  if (!(fit.amplitude > 0.0)) throw NumericalError("no correlation peak: amplitude must be > 0");
  return fit.decay_rate / (2.0 * fit.amplitude);
}

double effective_modes(double g2_zero) {
  if (!(g2_zero > 1.0)) {
    throw NumericalError("mode count undefined for g2(0) <= 1 (Poissonian or sub-Poissonian light)");
  }
  return 1.0 / (g2_zero - 1.0);
}

LinearFit pump_conversion_fit(std::span<const PumpPoint> points, double pair_efficiency) {
  if (points.size() < 3) throw NumericalError("pump conversion fit needs at least 3 points");
  if (!(pair_efficiency > 0.0)) throw ConfigError("pair detection efficiency must be > 0");
  const double n = static_cast<double>(points.size());
  double mx = 0, my = 0;
  for (const PumpPoint& p : points) {
    mx += p.pump_power;
    my += p.coincidence_rate;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const PumpPoint& p : points) {
    const double dx = p.pump_power - mx;
    const double dy = p.coincidence_rate - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 1e-300 * std::max(1.0, mx * mx)) || !std::isfinite(sxx)) {
    throw NumericalError("pump conversion fit is rank deficient (powers are not distinct)");
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.pair_efficiency = pair_efficiency;
  fit.inferred_pair_rate_per_mw = fit.slope / pair_efficiency;

  double rss = 0.0;
  for (const PumpPoint& p : points) {
    const double r = p.coincidence_rate - (fit.intercept + fit.slope * p.pump_power);
    rss += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;

  const bool have_sigmas = std::all_of(points.begin(), points.end(), [](const PumpPoint& p) { return p.sigma.has_value(); });
  if (have_sigmas) {
    // Var(beta) = sum_i c_i^2 sigma_i^2 for the OLS weights c_i.
    double var_slope = 0.0;
    double var_intercept = 0.0;
    for (const PumpPoint& p : points) {
      const double c_slope = (p.pump_power - mx) / sxx;
      const double c_intercept = 1.0 / n - mx * c_slope;
      const double s2 = *p.sigma * *p.sigma;
      var_slope += c_slope * c_slope * s2;
      var_intercept += c_intercept * c_intercept * s2;
    }
    fit.slope_sigma = std::sqrt(var_slope);
    fit.intercept_sigma = std::sqrt(var_intercept);
  } else {
    const double s2 = points.size() > 2 ? rss / (n - 2.0) : 0.0;
    fit.slope_sigma = std::sqrt(s2 / sxx);
    fit.intercept_sigma = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return fit;
}

SourceEstimate estimate_source(const ExpFit& cross, const ExpFit* autocorrelation) {
  SourceEstimate est;
  est.bandwidth_hz = bandwidth_from_fit(cross);
  est.pair_rate_hz = pair_rate_from_peak(cross);
  if (autocorrelation) {
    est.decay_ratio = autocorrelation->decay_time() / cross.decay_time();
    if (autocorrelation->peak() > 1.0) est.n_modes_effective = effective_modes(autocorrelation->peak());
  }
  return est;
}

}  // namespace spdc::fit
