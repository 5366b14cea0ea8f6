#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spdc/resonator.hpp"

namespace spdc::res {

struct PhaseMatchOptions {
  Polarization pump_polarization = Polarization::Extraordinary;
  Polarization parametric_polarization = Polarization::Ordinary;
  WgmOrder order = WgmOrder::Full;
  int radial_index = 1;  ///< q for all three modes
  int max_polar = 0;     ///< search signal/idler p in 0..max_polar
  double gap = 20e-9;    ///< sets the default resonance tolerance
  std::optional<double> tolerance_hz;  ///< default: one loaded linewidth
  /// Largest m_s - m_p/2 searched; 0 picks a bound from the dispersion table.
  long max_offset = 0;
};

/// One signal/idler/pump triplet. Reported signal and idler frequencies are
/// shifted by -residual/2 each so that nu_s + nu_i = nu_p holds exactly.
struct PhaseMatch {
  double temperature = 0.0;
  ModeIndex pump;
  ModeIndex signal;  ///< m_s >= m_i
  ModeIndex idler;
  double pump_frequency = 0.0;
  double signal_frequency = 0.0;
  double idler_frequency = 0.0;
  double residual_hz = 0.0;  ///< nu_s + nu_i - nu_p at the resonances
  double tolerance_hz = 0.0;
  bool matched = false;

  double pump_wavelength() const noexcept { return kSpeedOfLight / pump_frequency; }
  double signal_wavelength() const noexcept { return kSpeedOfLight / signal_frequency; }
  double idler_wavelength() const noexcept { return kSpeedOfLight / idler_frequency; }
};

/// Even azimuthal pump mode whose resonance lies closest to the wavelength.
ModeIndex pump_mode_near(const ResonatorSpec& spec, double wavelength, double temperature_c,
                         const PhaseMatchOptions& options = {});

/// Triplet with the smallest |residual| for a fixed pump mode (m_s + m_i = m_p).
PhaseMatch phase_match_best(const ResonatorSpec& spec, double temperature_c, const ModeIndex& pump,
                            const PhaseMatchOptions& options = {});

/// Same as phase_match_best but throws NumericalError when no triplet lies
/// within the tolerance.
PhaseMatch phase_match_solve(const ResonatorSpec& spec, double temperature_c, const ModeIndex& pump,
                             const PhaseMatchOptions& options = {});

/// Temperature where the degenerate triplet (m_p/2, m_p/2, m_p) has zero
/// residual, by bisection inside [t_lo, t_hi]. Throws NumericalError when
/// the residual does not change sign.
double degeneracy_temperature(const ResonatorSpec& spec, const ModeIndex& pump, double t_lo, double t_hi,
                              const PhaseMatchOptions& options = {});

/// Degeneracy point for a pump near the given wavelength: picks the pump mode,
/// finds its degeneracy temperature and repeats until the mode choice is stable.
struct Degeneracy {
  ModeIndex pump;
  double temperature = 0.0;
};
Degeneracy find_degeneracy(const ResonatorSpec& spec, double pump_wavelength, double t_lo, double t_hi,
                           const PhaseMatchOptions& options = {});

std::vector<PhaseMatch> phase_match_sweep(const ResonatorSpec& spec, const ModeIndex& pump,
                                          std::span<const double> temperatures,
                                          const PhaseMatchOptions& options = {});

}  // namespace spdc::res
