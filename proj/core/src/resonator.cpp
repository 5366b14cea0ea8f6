#include "spdc/resonator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <json.hpp>

#include "spdc/error.hpp"

namespace spdc::res {
namespace {

constexpr std::array<double, 10> kAiryZeros{2.33810741, 4.08794944, 5.52055983, 6.78670809, 7.94413359,
                                            9.02265085, 10.04017434, 11.00852430, 11.93601556, 12.82877675};

double wavenumber(double wavelength) { return 2.0 * std::numbers::pi / wavelength; }

void require_wavelength(double wavelength) {
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) throw ContractError("wavelength must be > 0");
}

Polarization parse_polarization(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + ": expected \"o\" or \"e\"");
  const auto s = j.get<std::string>();
  if (s == "o" || s == "ordinary") return Polarization::Ordinary;
  if (s == "e" || s == "extraordinary") return Polarization::Extraordinary;
  throw ConfigError(path + ": expected \"o\" or \"e\", got \"" + s + "\"");
}

double json_number(const nlohmann::json& doc, const char* key, const std::string& path) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(path + key + ": expected a number");
  return v.get<double>();
}

}  // namespace

void ResonatorSpec::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("resonator radius must be > 0");
  if (!(absorption > 0.0) || !std::isfinite(absorption)) throw ConfigError("absorption coefficient must be > 0");
  if (!std::isfinite(thermal_expansion)) throw ConfigError("thermal expansion must be finite");
}

ResonatorDesign ResonatorDesign::parse(std::string_view json_text, const DispersionTable& table) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("resonator design: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("resonator design: expected an object");
  static const std::array<const char*, 9> known{"radius_m",  "absorption_per_m", "gap_m",
                                                "thermal_expansion_per_K", "reference_temperature_C",
                                                "materials", "pump", "parametric_polarization",
                                                "coupling_constant"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      throw ConfigError("resonator design: unknown field '" + key + "'");
    }
  }
  ResonatorDesign d;
  try {
    if (doc.contains("radius_m")) d.spec.radius = json_number(doc, "radius_m", "");
    if (doc.contains("absorption_per_m")) d.spec.absorption = json_number(doc, "absorption_per_m", "");
    if (doc.contains("gap_m")) d.gap = json_number(doc, "gap_m", "");
    if (doc.contains("thermal_expansion_per_K")) {
      d.spec.thermal_expansion = json_number(doc, "thermal_expansion_per_K", "");
    }
    if (doc.contains("reference_temperature_C")) {
      d.spec.reference_temperature = json_number(doc, "reference_temperature_C", "");
    }
    if (doc.contains("materials")) {
      const auto& m = doc["materials"];
      if (!m.is_object()) throw ConfigError("materials: expected an object");
      for (const auto& [key, value] : m.items()) {
        if (!value.is_string()) throw ConfigError("materials." + key + ": expected a material name");
        const Material& mat = table.get(value.get<std::string>());
        if (key == "ordinary") d.spec.ordinary = mat;
        else if (key == "extraordinary") d.spec.extraordinary = mat;
        else if (key == "prism") d.spec.prism = mat;
        else throw ConfigError("materials: unknown field '" + key + "'");
      }
    }
    if (doc.contains("pump")) {
      const auto& p = doc["pump"];
      if (!p.is_object()) throw ConfigError("pump: expected an object");
      for (const auto& [key, value] : p.items()) {
        if (key == "wavelength_m") d.pump_wavelength = json_number(p, "wavelength_m", "pump.");
        else if (key == "polarization") d.pump_polarization = parse_polarization(value, "pump.polarization");
        else throw ConfigError("pump: unknown field '" + key + "'");
      }
    }
    if (doc.contains("parametric_polarization")) {
      d.parametric_polarization = parse_polarization(doc["parametric_polarization"], "parametric_polarization");
    }
    if (doc.contains("coupling_constant")) {
      const auto& c = doc["coupling_constant"];
      const std::string s = c.is_string() ? c.get<std::string>() : "";
      if (s == "verbatim") d.spec.coupling = CouplingConstant::Verbatim;
      else if (s == "alternate") d.spec.coupling = CouplingConstant::Alternate;
      else throw ConfigError("coupling_constant: expected \"verbatim\" or \"alternate\"");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("resonator design: ") + e.what());
  }
  d.spec.validate();
  if (!(d.gap >= 0.0)) throw ConfigError("gap_m must be >= 0");
  if (!(d.pump_wavelength > 0.0)) throw ConfigError("pump.wavelength_m must be > 0");
  return d;
}

ResonatorDesign ResonatorDesign::load(const std::filesystem::path& path, const DispersionTable& table) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open resonator design " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), table);
}

double q_absorption(const ResonatorSpec& spec, double wavelength, double temperature_c, Polarization pol) {
  require_wavelength(wavelength);
  if (!(spec.absorption > 0.0)) throw ContractError("absorption coefficient must be > 0");
  const double n = spec.material(pol).index(wavelength, temperature_c);
  return 2.0 * std::numbers::pi * n / (spec.absorption * wavelength);
}

double q_coupling(const ResonatorSpec& spec, const CouplingState& state, double temperature_c, Polarization pol) {
  require_wavelength(state.wavelength);
  if (!(state.gap >= 0.0)) throw ContractError("prism gap must be >= 0");
  const double n = spec.material(pol).index(state.wavelength, temperature_c);
  const double nc = spec.prism.index(state.wavelength, temperature_c);
  if (!(nc > n)) throw ContractError("prism index must exceed the resonator index for frustrated coupling");
  const double shift = spec.coupling == CouplingConstant::Verbatim ? 2.0 : 1.0;
  if (!(n * n > shift)) {
    throw ContractError(spec.coupling == CouplingConstant::Verbatim
                            ? "evanescent constant is imaginary: n^2 <= 2"
                            : "evanescent constant is imaginary: n^2 <= 1");
  }
  const double kappa = wavenumber(state.wavelength) * std::sqrt(n * n - shift);
  const double pi = std::numbers::pi;
  const double a = spec.radius_at(temperature_c);
  return std::sqrt(2.0) * std::pow(pi, 2.5) * std::sqrt(n) * (n - 1.0) / std::sqrt(nc * nc - n * n) *
         std::pow(a / state.wavelength, 1.5) * std::exp(2.0 * kappa * state.gap);
}

double q_total(std::span<const double> qs) {
  if (qs.empty()) throw ContractError("q_total needs at least one Q");
  double inv = 0.0;
  for (double q : qs) {
    if (!(q > 0.0)) throw ContractError("Q factors must be > 0");
    inv += 1.0 / q;
  }
  return 1.0 / inv;
}

double bandwidth_of(double q, double frequency) {
  if (!(q > 0.0) || !(frequency > 0.0)) throw ContractError("bandwidth_of needs Q > 0 and nu > 0");
  return frequency / q;
}

double loaded_bandwidth(const ResonatorSpec& spec, const CouplingState& state, double temperature_c,
                        Polarization pol) {
  const std::array<double, 2> qs{q_absorption(spec, state.wavelength, temperature_c, pol),
                                 q_coupling(spec, state, temperature_c, pol)};
  return bandwidth_of(q_total(qs), kSpeedOfLight / state.wavelength);
}

std::vector<CurvePoint> bandwidth_vs_gap(const ResonatorSpec& spec, double wavelength, double temperature_c,
                                         std::span<const double> gaps, Polarization pol) {
  std::vector<CurvePoint> out;
  out.reserve(gaps.size());
  for (double d : gaps) out.push_back({d, loaded_bandwidth(spec, {d, wavelength}, temperature_c, pol)});
  return out;
}

std::vector<CurvePoint> bandwidth_vs_radius(const ResonatorSpec& spec, double wavelength, double temperature_c,
                                            std::span<const double> radii, double gap, Polarization pol) {
  std::vector<CurvePoint> out;
  out.reserve(radii.size());
  ResonatorSpec s = spec;
  for (double a : radii) {
    s.radius = a;
    s.validate();
    out.push_back({a, loaded_bandwidth(s, {gap, wavelength}, temperature_c, pol)});
  }
  return out;
}

double airy_zero(int q) {
  if (q < 1 || q > static_cast<int>(kAiryZeros.size())) throw ContractError("radial index q must be in 1..10");
  return kAiryZeros[static_cast<std::size_t>(q - 1)];
}

double wgm_size_parameter(const ModeIndex& mode, double index, Polarization pol, WgmOrder order) {
  if (mode.m < 1 || mode.p < 0) throw ContractError("mode index needs m >= 1 and p >= 0");
  const double alpha = airy_zero(mode.q);
  if (order == WgmOrder::Leading) return static_cast<double>(mode.m);
  if (!(index > 1.0)) throw ContractError("WGM expansion needs n > 1");
  const double nu = static_cast<double>(mode.m + mode.p) + 0.5;
  const double c = std::cbrt(nu / 2.0);
  const double P = pol == Polarization::Extraordinary ? index : 1.0 / index;
  return nu + alpha * c - P / std::sqrt(index * index - 1.0) + 0.15 * alpha * alpha / c;
}

double wgm_frequency(const ResonatorSpec& spec, const ModeIndex& mode, double temperature_c, Polarization pol,
                     WgmOrder order) {
  const Material& mat = spec.material(pol);
  const double a = spec.radius_at(temperature_c);
  if (!(a > 0.0)) throw ContractError("resonator radius must be > 0");
  constexpr double kTolerance = 1e3;
  constexpr int kMaxIterations = 100;

  // Start from a mid-band index so the first evaluation is inside the table.
  double n = mat.is_constant() ? mat.index(1.0, temperature_c)
                               : mat.index(std::sqrt(mat.lambda_min() * mat.lambda_max()), temperature_c);
  double nu = kSpeedOfLight * wgm_size_parameter(mode, n, pol, order) / (2.0 * std::numbers::pi * a * n);
  for (int i = 0; i < kMaxIterations; ++i) {
    n = mat.index(kSpeedOfLight / nu, temperature_c);
    const double next = kSpeedOfLight * wgm_size_parameter(mode, n, pol, order) / (2.0 * std::numbers::pi * a * n);
    if (!std::isfinite(next) || !(next > 0.0)) break;
    const bool done = std::abs(next - nu) < kTolerance;
    nu = next;
    if (done) return nu;
  }
  throw NumericalError("WGM frequency iteration did not converge for m = " + std::to_string(mode.m));
}

double voltage_detune(double volts, double slope, double limit) {
  if (!(std::abs(volts) <= limit)) throw ContractError("voltage outside the linear tuning regime");
  return slope * volts;
}

double thermal_detune(double delta_millikelvin, double slope) noexcept { return slope * delta_millikelvin; }

}  // namespace spdc::res
