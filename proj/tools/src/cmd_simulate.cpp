#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "output.hpp"
#include "spdc/correlator.hpp"
#include "spdc/error.hpp"
#include "spdc/inference.hpp"
#include "spdc/random.hpp"
#include "spdc/sim_config_io.hpp"
#include "spdc/source.hpp"

namespace spdc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct SimulateOptions {
  fs::path config;
  fs::path out_dir;
  std::string format = "bin";
  std::optional<std::uint64_t> seed;
  bool timing = false;
};

std::string tag_extension(const std::string& format) {
  if (format == "bin") return ".tags";
  if (format == "csv") return ".csv";
  throw ConfigError("--format must be 'bin' or 'csv'");
}

void run_simulate(const SimulateOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  sim::SimConfig cfg = io::load_sim_config(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  const std::string ext = tag_extension(opt.format);

  const sim::DetectedStreams det = sim::simulate_experiment(cfg);
  OutputSet out;
  out.add_input(opt.config);
  out.write_tags(opt.out_dir / ("idler" + ext), std::span<const TagStream>(&det.idler, 1));
  out.write_tags(opt.out_dir / ("s1" + ext), std::span<const TagStream>(&det.signal1, 1));
  out.write_tags(opt.out_dir / ("s2" + ext), std::span<const TagStream>(&det.signal2, 1));

  ordered_json m = manifest_base("simulate");
  m["seed"] = cfg.seed;
  m["config"] = ordered_json::parse(io::sim_config_to_json(cfg));
  m["counts"] = {{"idler", det.idler.size()}, {"s1", det.signal1.size()}, {"s2", det.signal2.size()}};
  if (opt.timing) {
    m["timing_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  out.commit(opt.out_dir / "manifest.json", m);
  log_info("simulated " + std::to_string(det.idler.size()) + " idler, " + std::to_string(det.signal1.size()) +
           " s1, " + std::to_string(det.signal2.size()) + " s2 tags into " + opt.out_dir.string());
}

struct PumpScanOptions {
  fs::path config;
  std::vector<double> powers_mw;
  double pairs_per_mw = 1.3e7;
  double window = 30e-9;
  fs::path out;
  bool timing = false;
};

TagStream merge_signal_arms(const TagStream& s1, const TagStream& s2) {
  require_same_tick(s1, s2);
  TagStream merged{sim::kSignal1Channel, s1.tick_ps, std::max(s1.span_ticks, s2.span_ticks), {}};
  merged.tags.resize(s1.size() + s2.size());
  std::merge(s1.tags.begin(), s1.tags.end(), s2.tags.begin(), s2.tags.end(), merged.tags.begin());
  return merged;
}

void run_pump_scan(const PumpScanOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  if (opt.powers_mw.size() < 3) throw ConfigError("--powers needs at least 3 values");
  if (!(opt.pairs_per_mw >= 0.0)) throw ConfigError("--pairs-per-mw must be >= 0");
  if (!(opt.window > 0.0)) throw ConfigError("--window must be > 0");
  const sim::SimConfig base = io::load_sim_config(opt.config);

  std::ostringstream csv;
  csv << "power_mw,pair_rate_hz,coincidences,coincidence_rate_hz,accidental_rate_hz,net_rate_hz,stderr_hz,g2_window\n";
  std::vector<fit::PumpPoint> points;
  auto rows = ordered_json::array();
  for (std::size_t i = 0; i < opt.powers_mw.size(); ++i) {
    const double power = opt.powers_mw[i];
    if (!(power >= 0.0)) throw ConfigError("--powers values must be >= 0");
    sim::SimConfig cfg = base;
    cfg.source.pair_rate = opt.pairs_per_mw * power;
    cfg.seed = derive_seed(base.seed, 0x70756d70ULL + i);
    const sim::DetectedStreams det = sim::simulate_experiment(cfg);
    const TagStream signal = merge_signal_arms(det.signal1, det.signal2);
    const double span = det.idler.span_seconds();
    const auto n = corr::coincidences(det.idler, signal, opt.window);
    const double rate = static_cast<double>(n) / span;
    // Expected chance coincidences for independent streams in the same window.
    const double accidental = det.idler.rate() * signal.rate() * opt.window;
    const double net = rate - accidental;
    const double sigma = std::sqrt(std::max<double>(static_cast<double>(n), 1.0)) / span;
    const double g2 = accidental > 0.0 ? rate / accidental : 0.0;
    points.push_back({power, net, sigma});
    csv << fmt(power) << ',' << fmt(cfg.source.pair_rate) << ',' << n << ',' << fmt(rate) << ',' << fmt(accidental)
        << ',' << fmt(net) << ',' << fmt(sigma) << ',' << fmt(g2) << '\n';
    rows.push_back({{"power_mw", power},
                    {"seed", cfg.seed},
                    {"coincidences", n},
                    {"net_rate_hz", net},
                    {"stderr_hz", sigma},
                    {"g2_window", g2}});
  }

  // Pair detection probability: both detectors fire and the delay falls in the window.
  const double capture = -std::expm1(-base.source.gamma * opt.window / 2.0);
  const double efficiency = base.idler_detector.efficiency *
                            (base.splitter_ratio * base.signal1_detector.efficiency +
                             (1.0 - base.splitter_ratio) * base.signal2_detector.efficiency) *
                            capture;
  const fit::LinearFit lf = fit::pump_conversion_fit(points, efficiency);

  ordered_json report;
  report["pairs_per_mw_configured"] = opt.pairs_per_mw;
  report["window_s"] = opt.window;
  report["pair_detection_efficiency"] = efficiency;
  report["window_capture_fraction"] = capture;
  report["points"] = rows;
  report["fit"] = {{"slope_hz_per_mw", lf.slope},
                   {"slope_stderr", lf.slope_sigma},
                   {"intercept_hz", lf.intercept},
                   {"intercept_stderr", lf.intercept_sigma},
                   {"r_squared", lf.r_squared},
                   {"pairs_per_mw_inferred", lf.inferred_pair_rate_per_mw}};

  OutputSet out;
  out.add_input(opt.config);
  fs::path csv_path = opt.out;
  csv_path += ".csv";
  fs::path json_path = opt.out;
  json_path += ".json";
  out.write_text(csv_path, csv.str());
  out.write_text(json_path, report.dump(2) + "\n");
  ordered_json m = manifest_base("pump-scan");
  m["seed"] = base.seed;
  m["config"] = ordered_json::parse(io::sim_config_to_json(base));
  m["powers_mw"] = opt.powers_mw;
  if (opt.timing) {
    m["timing_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  fs::path manifest = opt.out;
  manifest += ".manifest.json";
  out.commit(manifest, m);
  log_info("pump conversion: " + fmt(lf.inferred_pair_rate_per_mw) + " pairs/s/mW (intercept " +
           fmt(lf.intercept) + " +- " + fmt(lf.intercept_sigma) + " /s)");
}

}  // namespace

Command add_simulate(CLI::App& root) {
  auto opt = std::make_shared<SimulateOptions>();
  CLI::App* app = root.add_subcommand("simulate", "Simulate detected idler/s1/s2 tag streams from a config");
  app->add_option("-c,--config", opt->config, "Simulation config (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("-o,--out", opt->out_dir, "Output directory")->required();
  app->add_option("--format", opt->format, "Tag file format: bin or csv")->capture_default_str();
  app->add_option("--seed", opt->seed, "Override the config seed");
  app->add_flag("--timing", opt->timing, "Record wall time in the manifest");
  return {app, [opt] { run_simulate(*opt); }};
}

Command add_pump_scan(CLI::App& root) {
  auto opt = std::make_shared<PumpScanOptions>();
  CLI::App* app = root.add_subcommand("pump-scan", "Coincidence rate versus pump power with a linear fit");
  app->add_option("-c,--config", opt->config, "Base simulation config (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("--powers", opt->powers_mw, "Pump powers in mW")->required()->delimiter(',');
  app->add_option("--pairs-per-mw", opt->pairs_per_mw, "Pair generation rate per mW of pump")->capture_default_str();
  app->add_option("--window", opt->window, "Coincidence window, seconds")->capture_default_str();
  app->add_option("-o,--out", opt->out, "Output prefix (.csv, .json, .manifest.json)")->required();
  app->add_flag("--timing", opt->timing, "Record wall time in the manifest");
  return {app, [opt] { run_pump_scan(*opt); }};
}

}  // namespace spdc::cli
