#include "spdc/dispersion.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spdc/error.hpp"

#ifndef SPDC_DATA_DIR
#define SPDC_DATA_DIR "."
#endif

namespace spdc::res {

Material Material::constant(std::string name, double index) {
  if (!(index >= 1.0) || !std::isfinite(index)) throw ConfigError("constant index must be >= 1");
  Material m;
  m.name_ = std::move(name);
  m.constant_ = index;
  return m;
}

Material Material::sellmeier(std::string name, std::vector<SellmeierTerm> terms, double t_ref_c, double dn_dt,
                             double lambda_min_um, double lambda_max_um, double t_min_c, double t_max_c,
                             std::string citation) {
  if (terms.empty()) throw ConfigError("material '" + name + "': Sellmeier set needs at least one term");
  if (!(lambda_min_um > 0.0 && lambda_max_um > lambda_min_um)) {
    throw ConfigError("material '" + name + "': invalid wavelength range");
  }
  if (!(t_max_c > t_min_c)) throw ConfigError("material '" + name + "': invalid temperature range");
  for (const SellmeierTerm& t : terms) {
    const double l2_min = lambda_min_um * lambda_min_um;
    const double l2_max = lambda_max_um * lambda_max_um;
    if (t.c_um2 >= l2_min && t.c_um2 <= l2_max) {
      throw ConfigError("material '" + name + "': Sellmeier pole inside the validity range");
    }
  }
  Material m;
  m.name_ = std::move(name);
  m.citation_ = std::move(citation);
  m.terms_ = std::move(terms);
  m.t_ref_ = t_ref_c;
  m.dn_dt_ = dn_dt;
  m.lambda_min_um_ = lambda_min_um;
  m.lambda_max_um_ = lambda_max_um;
  m.t_min_ = t_min_c;
  m.t_max_ = t_max_c;
  return m;
}

bool Material::in_domain(double lambda_m, double temperature_c) const noexcept {
  if (is_constant()) return lambda_m > 0.0 && std::isfinite(lambda_m);
  const double um = lambda_m * 1e6;
  return um >= lambda_min_um_ && um <= lambda_max_um_ && temperature_c >= t_min_ && temperature_c <= t_max_;
}

double Material::index(double lambda_m, double temperature_c) const {
  if (!in_domain(lambda_m, temperature_c)) {
    std::ostringstream msg;
    msg << "material '" << name_ << "': lambda = " << lambda_m << " m, T = " << temperature_c
        << " C is outside the dispersion table";
    throw ContractError(msg.str());
  }
  if (is_constant()) return constant_;
  const double l2 = lambda_m * lambda_m * 1e12;
  double n2 = 1.0;
  for (const SellmeierTerm& t : terms_) n2 += t.b * l2 / (l2 - t.c_um2);
  return std::sqrt(n2) + dn_dt_ * (temperature_c - t_ref_);
}

double Material::group_index(double lambda_m, double temperature_c) const {
  if (is_constant()) return index(lambda_m, temperature_c);
  const double h = lambda_m * 1e-4;
  const double lo = std::max(lambda_m - h, lambda_min());
  const double hi = std::min(lambda_m + h, lambda_max());
  const double slope = (index(hi, temperature_c) - index(lo, temperature_c)) / (hi - lo);
  return index(lambda_m, temperature_c) - lambda_m * slope;
}

namespace {

double number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

std::pair<double, double> range(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path + ": expected [min, max]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

Material parse_material(const std::string& name, const nlohmann::json& j) {
  const std::string path = "materials." + name;
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  const std::string form = j.value("form", "");
  if (form == "constant") {
    if (!j.contains("n")) throw ConfigError(path + ".n: missing");
    return Material::constant(name, number(j["n"], path + ".n"));
  }
  if (form != "sellmeier") throw ConfigError(path + ".form: expected \"sellmeier\" or \"constant\"");
  for (const char* key : {"B", "C_um2", "lambda_um", "T_C"}) {
    if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing");
  }
  const auto& b = j["B"];
  const auto& c = j["C_um2"];
  if (!b.is_array() || !c.is_array() || b.size() != c.size()) {
    throw ConfigError(path + ": B and C_um2 must be arrays of equal length");
  }
  std::vector<SellmeierTerm> terms;
  for (std::size_t i = 0; i < b.size(); ++i) {
    terms.push_back({number(b[i], path + ".B[" + std::to_string(i) + "]"),
                     number(c[i], path + ".C_um2[" + std::to_string(i) + "]")});
  }
  const auto [lmin, lmax] = range(j["lambda_um"], path + ".lambda_um");
  const auto [tmin, tmax] = range(j["T_C"], path + ".T_C");
  const double t_ref = j.contains("T_ref_C") ? number(j["T_ref_C"], path + ".T_ref_C") : 20.0;
  const double dn_dt = j.contains("dn_dT_per_K") ? number(j["dn_dT_per_K"], path + ".dn_dT_per_K") : 0.0;
  return Material::sellmeier(name, std::move(terms), t_ref, dn_dt, lmin, lmax, tmin, tmax,
                             j.value("citation", ""));
}

}  // namespace

DispersionTable DispersionTable::parse(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("dispersion table: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("materials") || !doc["materials"].is_object()) {
    throw ConfigError("dispersion table: missing 'materials' object");
  }
  DispersionTable table;
  for (const auto& [name, entry] : doc["materials"].items()) table.add(parse_material(name, entry));
  return table;
}

DispersionTable DispersionTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dispersion table " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

const DispersionTable& DispersionTable::bundled() {
  static const DispersionTable table = load(data_dir() / "dispersion.json");
  return table;
}

void DispersionTable::add(Material m) {
  const std::string name = m.name();
  materials_.insert_or_assign(name, std::move(m));
}

const Material& DispersionTable::get(const std::string& name) const {
  const auto it = materials_.find(name);
  if (it == materials_.end()) throw ConfigError("unknown material '" + name + "'");
  return it->second;
}

std::vector<std::string> DispersionTable::names() const {
  std::vector<std::string> out;
  for (const auto& [name, m] : materials_) out.push_back(name);
  return out;
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("SPDC_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return SPDC_DATA_DIR;
}

}  // namespace spdc::res
