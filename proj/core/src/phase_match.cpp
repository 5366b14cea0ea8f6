#include "spdc/phase_match.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "spdc/error.hpp"

namespace spdc::res {
namespace {

constexpr int kCoarseGrid = 256;

class TripletResidual {
 public:
  TripletResidual(const ResonatorSpec& spec, double temperature, const ModeIndex& pump,
                  const PhaseMatchOptions& options)
      : spec_(spec), temperature_(temperature), pump_(pump), options_(options) {
    nu_p_ = wgm_frequency(spec_, pump_, temperature_, options_.pump_polarization, options_.order);
  }

  double pump_frequency() const noexcept { return nu_p_; }

  double frequency(long m, int p) const {
    return wgm_frequency(spec_, {m, options_.radial_index, p}, temperature_, options_.parametric_polarization,
                         options_.order);
  }

  /// Signal mode m_p/2 (rounded up) + k, idler the remainder.
  double residual(long k, int ps, int pi) const {
    const long ms = first_signal() + k;
    return frequency(ms, ps) + frequency(pump_.m - ms, pi) - nu_p_;
  }

  long first_signal() const noexcept { return (pump_.m + 1) / 2; }

 private:
  const ResonatorSpec& spec_;
  double temperature_;
  ModeIndex pump_;
  const PhaseMatchOptions& options_;
  double nu_p_ = 0.0;
};

struct Candidate {
  long k = 0;
  int ps = 0;
  int pi = 0;
  double residual = 0.0;
};

// Largest offset keeping the idler inside the dispersion tables.
long default_max_offset(const ResonatorSpec& spec, const ModeIndex& pump, double nu_p,
                        const PhaseMatchOptions& options) {
  const Material& mat = spec.material(options.parametric_polarization);
  double lambda_max = mat.is_constant() ? 0.0 : mat.lambda_max();
  if (!spec.prism.is_constant()) {
    lambda_max = lambda_max > 0.0 ? std::min(lambda_max, spec.prism.lambda_max()) : spec.prism.lambda_max();
  }
  const long half = pump.m / 2;
  if (lambda_max <= 0.0) return std::max(1L, half - 1);
  // m_i / m_p roughly tracks nu_i / nu_p; keep a 10% margin on the long-wavelength end.
  const double min_idler_fraction = 1.1 * (kSpeedOfLight / lambda_max) / nu_p;
  const long min_idler = static_cast<long>(std::ceil(min_idler_fraction * static_cast<double>(pump.m)));
  return std::clamp(pump.m - min_idler - (pump.m + 1) / 2, 1L, std::max(1L, half - 1));
}

Candidate best_for_polar(const TripletResidual& f, long k_max, int ps, int pi) {
  Candidate best{0, ps, pi, f.residual(0, ps, pi)};
  auto consider = [&](long k) {
    if (k < 0 || k > k_max) return;
    const double r = f.residual(k, ps, pi);
    if (std::abs(r) < std::abs(best.residual)) best = {k, ps, pi, r};
  };

  const long steps = std::min<long>(kCoarseGrid, k_max);
  std::vector<long> grid;
  for (long j = 0; j <= steps; ++j) grid.push_back(k_max * j / steps);
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> values;
  values.reserve(grid.size());
  for (long k : grid) values.push_back(f.residual(k, ps, pi));

  for (std::size_t j = 0; j < grid.size(); ++j) {
    consider(grid[j]);
    if (j + 1 < grid.size() && std::signbit(values[j]) != std::signbit(values[j + 1])) {
      // Integer bisection down to the adjacent pair around the sign change.
      long lo = grid[j];
      long hi = grid[j + 1];
      double f_lo = values[j];
      while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        const double f_mid = f.residual(mid, ps, pi);
        if (std::signbit(f_mid) == std::signbit(f_lo)) {
          lo = mid;
          f_lo = f_mid;
        } else {
          hi = mid;
        }
      }
      consider(lo);
      consider(hi);
    }
    // Local minimum of |F| without a sign change: golden-section over integers.
    if (j > 0 && j + 1 < grid.size() && std::abs(values[j]) <= std::abs(values[j - 1]) &&
        std::abs(values[j]) <= std::abs(values[j + 1]) &&
        std::signbit(values[j - 1]) == std::signbit(values[j + 1])) {
      long lo = grid[j - 1];
      long hi = grid[j + 1];
      while (hi - lo > 3) {
        const long m1 = lo + (hi - lo) / 3;
        const long m2 = hi - (hi - lo) / 3;
        if (std::abs(f.residual(m1, ps, pi)) < std::abs(f.residual(m2, ps, pi))) {
          hi = m2;
        } else {
          lo = m1;
        }
      }
      for (long k = lo; k <= hi; ++k) consider(k);
    }
  }
  return best;
}

double tolerance_for(const ResonatorSpec& spec, double temperature, double nu_s, double nu_i,
                     const PhaseMatchOptions& options) {
  if (options.tolerance_hz) return *options.tolerance_hz;
  const double ws = loaded_bandwidth(spec, {options.gap, kSpeedOfLight / nu_s}, temperature,
                                     options.parametric_polarization);
  const double wi = loaded_bandwidth(spec, {options.gap, kSpeedOfLight / nu_i}, temperature,
                                     options.parametric_polarization);
  return std::max(ws, wi);
}

void check_options(const PhaseMatchOptions& options, const ModeIndex& pump) {
  if (options.max_polar < 0) throw ConfigError("max_polar must be >= 0");
  if (options.max_offset < 0) throw ConfigError("max_offset must be >= 0");
  if (options.tolerance_hz && !(*options.tolerance_hz > 0.0)) throw ConfigError("tolerance must be > 0");
  if (pump.m < 4) throw ContractError("pump azimuthal index too small");
}

}  // namespace

ModeIndex pump_mode_near(const ResonatorSpec& spec, double wavelength, double temperature_c,
                         const PhaseMatchOptions& options) {
  if (!(wavelength > 0.0)) throw ContractError("pump wavelength must be > 0");
  const double target = kSpeedOfLight / wavelength;
  const double n = spec.material(options.pump_polarization).index(wavelength, temperature_c);
  const int q = options.radial_index;
  auto nu = [&](long m) {
    return wgm_frequency(spec, {m, q, 0}, temperature_c, options.pump_polarization, options.order);
  };
  long m = std::max(4L, std::lround(2.0 * std::numbers::pi * spec.radius_at(temperature_c) * n / wavelength));
  for (int iter = 0; iter < 50; ++iter) {
    const double here = nu(m);
    const double fsr = nu(m + 1) - here;
    const long step = std::lround((target - here) / fsr);
    if (step == 0) break;
    m = std::max(4L, m + step);
  }
  const long even = m - (m % 2);
  const long best = std::abs(nu(even) - target) <= std::abs(nu(even + 2) - target) ? even : even + 2;
  return {best, q, 0};
}

PhaseMatch phase_match_best(const ResonatorSpec& spec, double temperature_c, const ModeIndex& pump,
                            const PhaseMatchOptions& options) {
  check_options(options, pump);
  const TripletResidual f(spec, temperature_c, pump, options);
  const long k_max = options.max_offset > 0 ? options.max_offset
                                            : default_max_offset(spec, pump, f.pump_frequency(), options);

  Candidate best{0, 0, 0, HUGE_VAL};
  for (int ps = 0; ps <= options.max_polar; ++ps) {
    for (int pi = 0; pi <= options.max_polar; ++pi) {
      const Candidate c = best_for_polar(f, k_max, ps, pi);
      if (std::abs(c.residual) < std::abs(best.residual)) best = c;
    }
  }

  PhaseMatch out;
  out.temperature = temperature_c;
  out.pump = pump;
  const long ms = f.first_signal() + best.k;
  out.signal = {ms, options.radial_index, best.ps};
  out.idler = {pump.m - ms, options.radial_index, best.pi};
  out.pump_frequency = f.pump_frequency();
  out.residual_hz = best.residual;
  if (out.signal.m == out.idler.m && out.signal.p == out.idler.p) {
    out.signal_frequency = 0.5 * out.pump_frequency;
    out.idler_frequency = 0.5 * out.pump_frequency;
  } else {
    out.signal_frequency = f.frequency(out.signal.m, out.signal.p) - 0.5 * best.residual;
    out.idler_frequency = out.pump_frequency - out.signal_frequency;
  }
  out.tolerance_hz = tolerance_for(spec, temperature_c, out.signal_frequency, out.idler_frequency, options);
  out.matched = std::abs(out.residual_hz) <= out.tolerance_hz;
  return out;
}

PhaseMatch phase_match_solve(const ResonatorSpec& spec, double temperature_c, const ModeIndex& pump,
                             const PhaseMatchOptions& options) {
  PhaseMatch pm = phase_match_best(spec, temperature_c, pump, options);
  if (!pm.matched) {
    std::ostringstream msg;
    msg << "no phase-matched triplet at T = " << temperature_c << " C (best residual " << pm.residual_hz
        << " Hz, tolerance " << pm.tolerance_hz << " Hz)";
    throw NumericalError(msg.str());
  }
  return pm;
}

double degeneracy_temperature(const ResonatorSpec& spec, const ModeIndex& pump, double t_lo, double t_hi,
                              const PhaseMatchOptions& options) {
  if (pump.m % 2 != 0) throw ContractError("degenerate triplet needs an even pump index");
  if (!(t_hi > t_lo)) throw ConfigError("degeneracy search needs t_lo < t_hi");
  const ModeIndex half{pump.m / 2, options.radial_index, 0};
  auto residual = [&](double t) {
    return 2.0 * wgm_frequency(spec, half, t, options.parametric_polarization, options.order) -
           wgm_frequency(spec, pump, t, options.pump_polarization, options.order);
  };
  double f_lo = residual(t_lo);
  const double f_hi = residual(t_hi);
  if (f_lo == 0.0) return t_lo;
  if (f_hi == 0.0) return t_hi;
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    std::ostringstream msg;
    msg << "no degeneracy between " << t_lo << " C and " << t_hi << " C (residuals " << f_lo << ", " << f_hi
        << " Hz)";
    throw NumericalError(msg.str());
  }
  double lo = t_lo;
  double hi = t_hi;
  for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = residual(mid);
    if (f_mid == 0.0) return mid;
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Degeneracy find_degeneracy(const ResonatorSpec& spec, double pump_wavelength, double t_lo, double t_hi,
                           const PhaseMatchOptions& options) {
  double t = 0.5 * (t_lo + t_hi);
  ModeIndex pump = pump_mode_near(spec, pump_wavelength, t, options);
  for (int iter = 0; iter < 10; ++iter) {
    t = degeneracy_temperature(spec, pump, t_lo, t_hi, options);
    const ModeIndex next = pump_mode_near(spec, pump_wavelength, t, options);
    if (next == pump) return {pump, t};
    pump = next;
  }
  throw NumericalError("pump mode selection did not settle while locating the degeneracy");
}

std::vector<PhaseMatch> phase_match_sweep(const ResonatorSpec& spec, const ModeIndex& pump,
                                          std::span<const double> temperatures, const PhaseMatchOptions& options) {
  std::vector<PhaseMatch> out;
  out.reserve(temperatures.size());
  for (double t : temperatures) out.push_back(phase_match_best(spec, t, pump, options));
  return out;
}

}  // namespace spdc::res
