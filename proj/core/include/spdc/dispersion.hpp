#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace spdc::res {

/// One term B lambda^2 / (lambda^2 - C) of a Sellmeier sum, C in um^2.
struct SellmeierTerm {
  double b = 0.0;
  double c_um2 = 0.0;
};

/// Refractive index n(lambda, T). Sellmeier at a reference temperature plus a
/// linear thermo-optic term, or a constant index for test materials.
class Material {
 public:
  static Material constant(std::string name, double index);
  static Material sellmeier(std::string name, std::vector<SellmeierTerm> terms, double t_ref_c, double dn_dt,
                            double lambda_min_um, double lambda_max_um, double t_min_c, double t_max_c,
                            std::string citation = {});

  /// lambda in meters, T in degrees C. Throws ContractError outside the table.
  double index(double lambda_m, double temperature_c) const;
  /// n - lambda dn/dlambda.
  double group_index(double lambda_m, double temperature_c) const;
  bool in_domain(double lambda_m, double temperature_c) const noexcept;

  const std::string& name() const noexcept { return name_; }
  const std::string& citation() const noexcept { return citation_; }
  bool is_constant() const noexcept { return terms_.empty(); }
  double lambda_min() const noexcept { return lambda_min_um_ * 1e-6; }
  double lambda_max() const noexcept { return lambda_max_um_ * 1e-6; }

 private:
  std::string name_;
  std::string citation_;
  std::vector<SellmeierTerm> terms_;
  double constant_ = 1.0;
  double t_ref_ = 20.0;
  double dn_dt_ = 0.0;
  double lambda_min_um_ = 0.0;
  double lambda_max_um_ = 1e9;
  double t_min_ = -273.15;
  double t_max_ = 1e9;
};

/// Named materials loaded from a JSON dispersion file. Read-only after load.
class DispersionTable {
 public:
  static DispersionTable parse(std::string_view json_text);
  static DispersionTable load(const std::filesystem::path& path);
  /// The bundled table (data directory from $SPDC_DATA_DIR or the build).
  static const DispersionTable& bundled();

  void add(Material m);
  /// Throws ConfigError for an unknown name.
  const Material& get(const std::string& name) const;
  bool contains(const std::string& name) const { return materials_.count(name) != 0; }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Material> materials_;
};

/// Directory holding the bundled data files.
std::filesystem::path data_dir();

}  // namespace spdc::res
