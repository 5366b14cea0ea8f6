#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "spdc/dispersion.hpp"

namespace spdc::res {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Ordinary: field perpendicular to the optic (symmetry) axis.
/// Extraordinary: field along it.
enum class Polarization { Ordinary, Extraordinary };

/// Evanescent constant used in the coupling Q: k sqrt(n^2 - 2) as commonly
/// printed, or k sqrt(n^2 - 1).
enum class CouplingConstant { Verbatim, Alternate };

/// Terms of the large-m WGM eigenfrequency expansion.
enum class WgmOrder {
  Leading,  ///< x = m
  Full,     ///< Airy-zero radial term, polarization term and the (3/20) correction
};

struct ResonatorSpec {
  double radius = 1.9e-3;      ///< meters, at reference_temperature
  double absorption = 0.263;   ///< 1/m
  Material ordinary = Material::constant("n=2.2", 2.2);
  Material extraordinary = Material::constant("n=2.2", 2.2);
  Material prism = Material::constant("n=2.4", 2.4);
  double thermal_expansion = 0.0;  ///< relative radius change per K
  double reference_temperature = 20.0;
  CouplingConstant coupling = CouplingConstant::Verbatim;

  const Material& material(Polarization pol) const noexcept {
    return pol == Polarization::Ordinary ? ordinary : extraordinary;
  }
  double radius_at(double temperature_c) const noexcept {
    return radius * (1.0 + thermal_expansion * (temperature_c - reference_temperature));
  }
  /// Throws ConfigError for a <= 0 or alpha <= 0.
  void validate() const;
};

struct CouplingState {
  double gap = 0.0;         ///< meters
  double wavelength = 0.0;  ///< meters (vacuum)
};

struct ModeIndex {
  long m = 1;  ///< azimuthal
  int q = 1;   ///< radial
  int p = 0;   ///< polar

  bool operator==(const ModeIndex&) const = default;
};

/// A resonator together with its operating point, as read from a design file.
struct ResonatorDesign {
  ResonatorSpec spec;
  double gap = 20e-9;
  double pump_wavelength = 532e-9;
  Polarization pump_polarization = Polarization::Extraordinary;
  Polarization parametric_polarization = Polarization::Ordinary;

  static ResonatorDesign parse(std::string_view json_text, const DispersionTable& table = DispersionTable::bundled());
  static ResonatorDesign load(const std::filesystem::path& path,
                              const DispersionTable& table = DispersionTable::bundled());
};

/// Q_a = 2 pi n / (alpha lambda).
double q_absorption(const ResonatorSpec& spec, double wavelength, double temperature_c,
                    Polarization pol = Polarization::Ordinary);

/// Prism coupling Q. Throws ContractError when n^2 <= 2 (verbatim constant),
/// when the prism index does not exceed the resonator index, or for d < 0.
double q_coupling(const ResonatorSpec& spec, const CouplingState& state, double temperature_c,
                  Polarization pol = Polarization::Ordinary);

/// (sum 1/Q_i)^-1; throws ContractError for an empty list or Q <= 0.
double q_total(std::span<const double> qs);

/// nu / Q.
double bandwidth_of(double q, double frequency);

/// Loaded linewidth at one gap.
double loaded_bandwidth(const ResonatorSpec& spec, const CouplingState& state, double temperature_c,
                        Polarization pol = Polarization::Ordinary);

struct CurvePoint {
  double x = 0.0;  ///< gap or radius, meters
  double bandwidth_hz = 0.0;
};

std::vector<CurvePoint> bandwidth_vs_gap(const ResonatorSpec& spec, double wavelength, double temperature_c,
                                         std::span<const double> gaps, Polarization pol = Polarization::Ordinary);
std::vector<CurvePoint> bandwidth_vs_radius(const ResonatorSpec& spec, double wavelength, double temperature_c,
                                            std::span<const double> radii, double gap,
                                            Polarization pol = Polarization::Ordinary);

/// Magnitude of the q-th zero of Ai (q = 1..10).
double airy_zero(int q);

/// Dimensionless size parameter x = 2 pi a n nu / c of a mode, for index n.
double wgm_size_parameter(const ModeIndex& mode, double index, Polarization pol, WgmOrder order);

/// Self-consistent eigenfrequency nu = c x / (2 pi a n(c/nu, T)), iterated to
/// 1 kHz. Throws NumericalError on non-convergence, ContractError outside the
/// dispersion table or for an invalid mode index.
double wgm_frequency(const ResonatorSpec& spec, const ModeIndex& mode, double temperature_c,
                     Polarization pol = Polarization::Ordinary, WgmOrder order = WgmOrder::Full);

inline constexpr double kVoltageSlope = 37.5e6;   ///< Hz per volt
inline constexpr double kVoltageLimit = 10.0;     ///< volts, linear regime
inline constexpr double kThermalSlope = 5e6;      ///< Hz per mK

/// Linear electro-optic detuning s_V V. Throws ContractError for |V| > limit.
double voltage_detune(double volts, double slope = kVoltageSlope, double limit = kVoltageLimit);
/// Linear thermo-refractive detuning s_T dT, dT in mK.
double thermal_detune(double delta_millikelvin, double slope = kThermalSlope) noexcept;

}  // namespace spdc::res
