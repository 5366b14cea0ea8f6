#include <array>
#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "output.hpp"
#include "spdc/error.hpp"
#include "spdc/phase_match.hpp"
#include "spdc/tag_io.hpp"

namespace spdc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct DesignOptions {
  fs::path spec;
  std::optional<fs::path> dispersion;
  std::string sweep = "budget";
  double wavelength = 1064e-9;
  double temperature = 20.0;
  std::optional<double> gap;
  double gap_min = 0.0;
  double gap_max = 500e-9;
  int points = 101;
  std::vector<double> radii{0.5e-3, 1.0e-3, 1.9e-3, 3.0e-3};
  double t_min = 0.0;
  double t_max = 200.0;
  double t_span = 3.0;
  int t_points = 61;
  std::string order = "full";
  int max_polar = 0;
  bool alternate_kappa = false;
  double volts = 4.0;
  fs::path out;
};

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw ConfigError("sweeps need at least 2 points");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

void run_design(const DesignOptions& opt) {
  OutputSet out;
  out.add_input(opt.spec);
  std::optional<res::DispersionTable> custom;
  if (opt.dispersion) {
    custom = res::DispersionTable::load(*opt.dispersion);
    out.add_input(*opt.dispersion);
  }
  res::ResonatorDesign design =
      res::ResonatorDesign::load(opt.spec, custom ? *custom : res::DispersionTable::bundled());
  if (opt.alternate_kappa) design.spec.coupling = res::CouplingConstant::Alternate;
  const double gap = opt.gap.value_or(design.gap);
  const res::Polarization pol = design.parametric_polarization;

  res::PhaseMatchOptions pmo;
  pmo.pump_polarization = design.pump_polarization;
  pmo.parametric_polarization = design.parametric_polarization;
  pmo.gap = gap;
  pmo.max_polar = opt.max_polar;
  if (opt.order == "leading") pmo.order = res::WgmOrder::Leading;
  else if (opt.order != "full") throw ConfigError("--order must be 'full' or 'leading'");

  std::ostringstream csv;
  ordered_json summary;
  summary["sweep"] = opt.sweep;
  summary["radius_m"] = design.spec.radius;
  summary["gap_m"] = gap;

  if (opt.sweep == "budget") {
    const res::CouplingState state{gap, opt.wavelength};
    const double qa = res::q_absorption(design.spec, opt.wavelength, opt.temperature, pol);
    const double qc = res::q_coupling(design.spec, state, opt.temperature, pol);
    const std::array<double, 2> qs{qa, qc};
    const double q = res::q_total(qs);
    const double nu = res::kSpeedOfLight / opt.wavelength;
    csv << "quantity,value\n"
        << "q_absorption," << fmt(qa) << "\nq_coupling," << fmt(qc) << "\nq_total," << fmt(q)
        << "\nbandwidth_hz," << fmt(res::bandwidth_of(q, nu)) << "\nintrinsic_bandwidth_hz,"
        << fmt(res::bandwidth_of(qa, nu)) << "\nvoltage_detune_hz," << fmt(res::voltage_detune(opt.volts)) << '\n';
    summary["q_absorption"] = qa;
    summary["q_coupling"] = qc;
    summary["q_total"] = q;
    summary["bandwidth_hz"] = res::bandwidth_of(q, nu);
  } else if (opt.sweep == "gap") {
    const auto gaps = linspace(opt.gap_min, opt.gap_max, opt.points);
    csv << "d_m,bandwidth_hz\n";
    for (const auto& p : res::bandwidth_vs_gap(design.spec, opt.wavelength, opt.temperature, gaps, pol)) {
      csv << fmt(p.x) << ',' << fmt(p.bandwidth_hz) << '\n';
    }
  } else if (opt.sweep == "radius") {
    csv << "a_m,bandwidth_hz\n";
    for (const auto& p : res::bandwidth_vs_radius(design.spec, opt.wavelength, opt.temperature, opt.radii, gap, pol)) {
      csv << fmt(p.x) << ',' << fmt(p.bandwidth_hz) << '\n';
    }
  } else if (opt.sweep == "temperature") {
    const res::Degeneracy deg = res::find_degeneracy(design.spec, design.pump_wavelength, opt.t_min, opt.t_max, pmo);
    const auto temps = linspace(deg.temperature, deg.temperature + opt.t_span, opt.t_points);
    csv << "T_C,lambda_s_m,lambda_i_m,residual_hz,m_s,m_i,matched\n";
    for (const auto& pm : res::phase_match_sweep(design.spec, deg.pump, temps, pmo)) {
      csv << fmt(pm.temperature) << ',' << fmt(pm.signal_wavelength()) << ',' << fmt(pm.idler_wavelength()) << ','
          << fmt(pm.residual_hz) << ',' << pm.signal.m << ',' << pm.idler.m << ',' << (pm.matched ? 1 : 0) << '\n';
    }
    summary["pump_m"] = deg.pump.m;
    summary["degeneracy_temperature_C"] = deg.temperature;
    const res::PhaseMatch at = res::phase_match_best(design.spec, deg.temperature, deg.pump, pmo);
    summary["degenerate_wavelength_m"] = at.signal_wavelength();
    summary["pump_wavelength_m"] = at.pump_wavelength();
  } else {
    throw ConfigError("--sweep must be budget, gap, radius or temperature");
  }

  fs::path csv_path = opt.out;
  csv_path += ".csv";
  fs::path json_path = opt.out;
  json_path += ".json";
  out.write_text(csv_path, csv.str());
  out.write_text(json_path, summary.dump(2) + "\n");
  fs::path manifest = opt.out;
  manifest += ".manifest.json";
  ordered_json m = manifest_base("design");
  m["options"] = {{"sweep", opt.sweep}, {"wavelength_m", opt.wavelength}, {"temperature_C", opt.temperature},
                  {"gap_m", gap}, {"order", opt.order}, {"max_polar", opt.max_polar},
                  {"alternate_kappa", opt.alternate_kappa}};
  out.commit(manifest, m);
  log_info("design " + opt.sweep + " written to " + csv_path.string());
}

struct ConvertOptions {
  fs::path in;
  fs::path out;
};

void run_convert(const ConvertOptions& opt) {
  const std::vector<TagStream> streams = io::read_tags(opt.in);
  OutputSet out;
  out.add_input(opt.in);
  out.write_tags(opt.out, streams);
  fs::path manifest = opt.out;
  manifest += ".manifest.json";
  out.commit(manifest, manifest_base("convert"));
}

}  // namespace

Command add_design(CLI::App& root) {
  auto opt = std::make_shared<DesignOptions>();
  CLI::App* app = root.add_subcommand("design", "Resonator Q budget, bandwidth and phase-matching curves");
  app->add_option("-s,--spec", opt->spec, "Resonator design (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("--dispersion", opt->dispersion, "Dispersion table (default: bundled)")->check(CLI::ExistingFile);
  app->add_option("--sweep", opt->sweep, "budget, gap, radius or temperature")->capture_default_str();
  app->add_option("--wavelength", opt->wavelength, "Wavelength for Q curves, m")->capture_default_str();
  app->add_option("--temperature", opt->temperature, "Temperature for Q curves, C")->capture_default_str();
  app->add_option("--gap", opt->gap, "Prism gap, m (default: from the design)");
  app->add_option("--gap-min", opt->gap_min, "Gap sweep start, m")->capture_default_str();
  app->add_option("--gap-max", opt->gap_max, "Gap sweep end, m")->capture_default_str();
  app->add_option("--points", opt->points, "Gap sweep points")->capture_default_str();
  app->add_option("--radii", opt->radii, "Radii for the radius sweep, m")->delimiter(',');
  app->add_option("--t-min", opt->t_min, "Degeneracy search lower bound, C")->capture_default_str();
  app->add_option("--t-max", opt->t_max, "Degeneracy search upper bound, C")->capture_default_str();
  app->add_option("--t-span", opt->t_span, "Temperature sweep above degeneracy, K")->capture_default_str();
  app->add_option("--t-points", opt->t_points, "Temperature sweep points")->capture_default_str();
  app->add_option("--order", opt->order, "WGM expansion: full or leading")->capture_default_str();
  app->add_option("--max-polar", opt->max_polar, "Search polar indices p up to this value")->capture_default_str();
  app->add_flag("--alternate-kappa", opt->alternate_kappa, "Use k sqrt(n^2 - 1) as the evanescent constant");
  app->add_option("--volts", opt->volts, "Voltage for the electro-optic detuning entry")->capture_default_str();
  app->add_option("-o,--out", opt->out, "Output prefix")->required();
  return {app, [opt] { run_design(*opt); }};
}

Command add_convert(CLI::App& root) {
  auto opt = std::make_shared<ConvertOptions>();
  CLI::App* app = root.add_subcommand("convert", "Convert tag files between binary (.tags) and CSV (.csv)");
  app->add_option("in", opt->in, "Input tag file")->required()->check(CLI::ExistingFile);
  app->add_option("out", opt->out, "Output tag file; format from the extension")->required();
  return {app, [opt] { run_convert(*opt); }};
}

}  // namespace spdc::cli
