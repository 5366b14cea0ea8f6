#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "output.hpp"
#include "spdc/error.hpp"
#include "spdc/inference.hpp"
#include "spdc/tag_io.hpp"

namespace spdc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

fs::path with_suffix(const fs::path& prefix, const char* suffix) {
  fs::path p = prefix;
  p += suffix;
  return p;
}

TagStream load_stream(const fs::path& path, std::optional<int> channel) {
  return channel ? io::read_channel(path, *channel) : io::read_single(path);
}

corr::CorrelogramMode parse_mode(const std::string& s) {
  if (s == "start-stop") return corr::CorrelogramMode::StartStop;
  if (s == "windowed") return corr::CorrelogramMode::WindowedPairwise;
  throw ConfigError("--mode must be 'start-stop' or 'windowed'");
}

// --- correlate -------------------------------------------------------------

struct CorrelateOptions {
  fs::path a;
  std::optional<fs::path> b;
  std::optional<int> a_channel;
  std::optional<int> b_channel;
  std::string mode = "start-stop";
  double bin = 3e-9;
  double max_lag = 100e-9;
  fs::path out;
};

void run_correlate(const CorrelateOptions& opt) {
  corr::CorrelogramConfig cfg;
  cfg.bin_width = opt.bin;
  cfg.max_lag = opt.max_lag;
  cfg.mode = parse_mode(opt.mode);
  cfg.validate();

  OutputSet out;
  const TagStream a = load_stream(opt.a, opt.a_channel);
  out.add_input(opt.a);
  corr::Correlogram h;
  if (opt.b) {
    const TagStream b = load_stream(*opt.b, opt.b_channel);
    out.add_input(*opt.b);
    h = corr::cross_correlogram(a, b, cfg);
  } else {
    h = corr::auto_correlogram(a, cfg);
  }
  const corr::G2Curve curve = corr::normalize_g2(h);

  ordered_json j;
  j["kind"] = h.autocorrelation ? "auto" : "cross";
  j["mode"] = opt.mode;
  j["bin_width_s"] = cfg.bin_width;
  j["max_lag_s"] = cfg.max_lag;
  j["n_a"] = h.n_a;
  j["n_b"] = h.n_b;
  j["span_s"] = h.span;
  j["bin_edges_s"] = h.bin_edges;
  j["counts"] = h.counts;
  j["g2"] = curve.g2;
  j["stderr"] = curve.sigma;

  out.write_text(with_suffix(opt.out, ".csv"), curve_csv(curve));
  out.write_text(with_suffix(opt.out, ".json"), j.dump(2) + "\n");
  ordered_json m = manifest_base("correlate");
  m["options"] = {{"mode", opt.mode}, {"bin_width_s", opt.bin}, {"max_lag_s", opt.max_lag}};
  out.commit(with_suffix(opt.out, ".manifest.json"), m);
  log_info(std::string(h.autocorrelation ? "auto" : "cross") + "-correlogram: " + std::to_string(h.n_a) + " x " +
           std::to_string(h.n_b) + " tags, " + std::to_string(curve.size()) + " bins");
}

// --- herald ----------------------------------------------------------------

struct HeraldOptions {
  fs::path idler;
  fs::path s1;
  fs::path s2;
  double tau_h = 10e-9;
  double bin = 3e-9;
  std::optional<double> max_lag;
  bool surface = false;
  fs::path out;
};

void run_herald(const HeraldOptions& opt) {
  corr::CorrelogramConfig cfg;
  cfg.bin_width = opt.bin;
  cfg.max_lag = opt.max_lag.value_or(2.0 * opt.tau_h);
  cfg.mode = corr::CorrelogramMode::WindowedPairwise;

  OutputSet out;
  const TagStream idler = io::read_single(opt.idler);
  const TagStream s1 = io::read_single(opt.s1);
  const TagStream s2 = io::read_single(opt.s2);
  for (const auto& p : {opt.idler, opt.s1, opt.s2}) out.add_input(p);

  const corr::ConditionedG2 c = corr::conditioned_g2(s1, s2, idler, opt.tau_h, cfg, opt.surface);
  if (c.triples == 0) log_warn("no heralded triples; the conditioned curve is all zeros");

  std::ostringstream csv;
  csv << "# bin_width_s=" << fmt(c.curve.bin_width) << "\n# herald_halfwidth_s=" << fmt(opt.tau_h)
      << "\ntau_s,g2,stderr,counts,expected\n";
  for (std::size_t i = 0; i < c.curve.size(); ++i) {
    csv << fmt(c.curve.tau[i]) << ',' << fmt(c.curve.g2[i]) << ',' << fmt(c.curve.sigma[i]) << ','
        << c.curve.counts[i] << ',' << fmt(c.denominator[i]) << '\n';
  }
  out.write_text(with_suffix(opt.out, ".csv"), csv.str());

  std::size_t center = c.curve.size() / 2;
  ordered_json j;
  j["herald_halfwidth_s"] = opt.tau_h;
  j["bin_width_s"] = cfg.bin_width;
  j["max_lag_s"] = cfg.max_lag;
  j["heralds"] = c.heralds;
  j["heralded_events"] = c.heralded_events;
  j["triples"] = c.triples;
  j["g2_zero"] = c.curve.g2.empty() ? 0.0 : c.curve.g2[center];
  j["g2_zero_stderr"] = c.curve.sigma.empty() ? 0.0 : c.curve.sigma[center];
  out.write_text(with_suffix(opt.out, ".json"), j.dump(2) + "\n");

  if (c.surface) {
    std::ostringstream s;
    s << "tau1_s,tau2_s,numerator,expected\n";
    const auto& ax = c.surface->axis;
    for (std::size_t r = 0; r < ax.size(); ++r) {
      for (std::size_t col = 0; col < ax.size(); ++col) {
        const std::size_t k = r * ax.size() + col;
        s << fmt(ax[r]) << ',' << fmt(ax[col]) << ',' << c.surface->numerator[k] << ','
          << fmt(c.surface->denominator[k]) << '\n';
      }
    }
    out.write_text(with_suffix(opt.out, ".surface.csv"), s.str());
  }
  ordered_json m = manifest_base("herald");
  m["options"] = {{"herald_halfwidth_s", opt.tau_h}, {"bin_width_s", opt.bin}, {"max_lag_s", cfg.max_lag}};
  out.commit(with_suffix(opt.out, ".manifest.json"), m);
  log_info("heralded g2(0) = " + fmt(j["g2_zero"].get<double>()) + " +- " +
           fmt(j["g2_zero_stderr"].get<double>()) + " from " + std::to_string(c.heralded_events) +
           " heralded events");
}

// --- fit -------------------------------------------------------------------

struct FitCommandOptions {
  std::optional<fs::path> cross;
  std::optional<fs::path> autocorr;
  std::string model = "auto";
  std::optional<double> fix_baseline;
  bool exclude_center = false;
  fs::path out;
};

fit::ExpModel parse_model(const std::string& s) {
  if (s == "auto") return fit::ExpModel::Auto;
  if (s == "point") return fit::ExpModel::Point;
  if (s == "binned") return fit::ExpModel::BinAveraged;
  throw ConfigError("--model must be 'auto', 'point' or 'binned'");
}

ordered_json fit_json(const fit::ExpFit& f) {
  ordered_json j;
  j["amplitude"] = f.amplitude;
  j["decay_rate_per_s"] = f.decay_rate;
  j["baseline"] = f.baseline;
  j["amplitude_stderr"] = std::sqrt(f.covariance[0][0]);
  j["decay_rate_stderr"] = f.decay_rate_sigma();
  j["baseline_stderr"] = std::sqrt(f.covariance[2][2]);
  j["peak"] = f.peak();
  j["peak_stderr"] = f.peak_sigma();
  j["decay_time_s"] = f.decay_time();
  j["chi2"] = f.chi2;
  j["dof"] = f.dof;
  j["reduced_chi2"] = f.reduced_chi2();
  j["iterations"] = f.iterations;
  j["model"] = f.model == fit::ExpModel::BinAveraged ? "binned" : "point";
  return j;
}

void run_fit(const FitCommandOptions& opt) {
  if (!opt.cross && !opt.autocorr) throw ConfigError("fit needs --cross and/or --auto");
  fit::FitOptions fo;
  fo.model = parse_model(opt.model);
  fo.fix_baseline = opt.fix_baseline;
  fo.exclude_center = opt.exclude_center;

  OutputSet out;
  ordered_json report;
  std::ostringstream human;
  std::optional<fit::ExpFit> cross;
  std::optional<fit::ExpFit> autoc;
  if (opt.cross) {
    out.add_input(*opt.cross);
    cross = fit::fit_exponential(read_curve_csv(*opt.cross), fo);
    ordered_json j = fit_json(*cross);
    j["bandwidth_hz"] = fit::bandwidth_from_fit(*cross);
    j["pair_rate_hz"] = fit::pair_rate_from_peak(*cross);
    report["cross"] = j;
    human << "cross: bandwidth " << fmt(fit::bandwidth_from_fit(*cross) / 1e6) << " MHz, pair rate "
          << fmt(fit::pair_rate_from_peak(*cross)) << " /s, g2(0) " << fmt(cross->peak()) << '\n';
  }
  if (opt.autocorr) {
    out.add_input(*opt.autocorr);
    autoc = fit::fit_exponential(read_curve_csv(*opt.autocorr), fo);
    ordered_json j = fit_json(*autoc);
    human << "auto: g2(0) " << fmt(autoc->peak()) << " +- " << fmt(autoc->peak_sigma()) << ", decay time "
          << fmt(autoc->decay_time()) << " s";
    if (autoc->peak() > 1.0) {
      const double n = fit::effective_modes(autoc->peak());
      j["effective_modes"] = n;
      human << ", ≈" << std::lround(n) << " effective modes";
    }
    human << '\n';
    report["auto"] = j;
  }
  if (cross && autoc) {
    const fit::SourceEstimate est = fit::estimate_source(*cross, &*autoc);
    report["decay_ratio"] = *est.decay_ratio;
    human << "auto/cross decay-time ratio " << fmt(*est.decay_ratio) << '\n';
  }
  out.write_text(opt.out, report.dump(2) + "\n");
  ordered_json m = manifest_base("fit");
  m["options"] = {{"model", opt.model}, {"exclude_center", opt.exclude_center}};
  if (opt.fix_baseline) m["options"]["fix_baseline"] = *opt.fix_baseline;
  fs::path manifest = opt.out;
  manifest.replace_extension(".manifest.json");
  out.commit(manifest, m);
  std::cout << human.str();
}

}  // namespace

std::string curve_csv(const corr::G2Curve& curve) {
  std::ostringstream csv;
  const bool edges = curve.bin_lo.size() == curve.size() && curve.bin_hi.size() == curve.size();
  csv << "# bin_width_s=" << fmt(curve.bin_width) << "\ntau_s,g2,stderr,counts" << (edges ? ",tau_lo_s,tau_hi_s" : "")
      << '\n';
  for (std::size_t i = 0; i < curve.size(); ++i) {
    csv << fmt(curve.tau[i]) << ',' << fmt(curve.g2[i]) << ',' << fmt(curve.sigma[i]) << ',' << curve.counts[i];
    if (edges) csv << ',' << fmt(curve.bin_lo[i]) << ',' << fmt(curve.bin_hi[i]);
    csv << '\n';
  }
  return csv.str();
}

corr::G2Curve read_curve_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open curve " + path.string());
  corr::G2Curve c;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> columns;
  auto where = [&] { return path.string() + ":" + std::to_string(line_no); };
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      if (s == "inf") return HUGE_VAL;
      if (s == "nan") return std::nan("");
      throw FormatError(where() + ": not a number: '" + s + "'");
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find("bin_width_s=");
      if (eq != std::string::npos) c.bin_width = to_double(line.substr(eq + 12));
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (columns.empty()) {
      columns = fields;
      for (const char* need : {"tau_s", "g2", "stderr"}) {
        if (std::find(columns.begin(), columns.end(), need) == columns.end()) {
          throw FormatError(where() + ": curve needs columns tau_s, g2, stderr");
        }
      }
      continue;
    }
    if (fields.size() != columns.size()) throw FormatError(where() + ": wrong number of fields");
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (columns[k] == "tau_s") c.tau.push_back(to_double(fields[k]));
      else if (columns[k] == "g2") c.g2.push_back(to_double(fields[k]));
      else if (columns[k] == "stderr") c.sigma.push_back(to_double(fields[k]));
      else if (columns[k] == "counts") c.counts.push_back(static_cast<std::uint64_t>(to_double(fields[k])));
      else if (columns[k] == "tau_lo_s") c.bin_lo.push_back(to_double(fields[k]));
      else if (columns[k] == "tau_hi_s") c.bin_hi.push_back(to_double(fields[k]));
    }
  }
  if (columns.empty()) throw FormatError(path.string() + ": missing column header");
  if (c.counts.size() != c.tau.size()) c.counts.assign(c.tau.size(), 0);
  return c;
}

Command add_correlate(CLI::App& root) {
  auto opt = std::make_shared<CorrelateOptions>();
  CLI::App* app = root.add_subcommand("correlate", "Cross- or auto-correlation histogram and normalized g2");
  app->add_option("a", opt->a, "Start (or only) tag file")->required()->check(CLI::ExistingFile);
  app->add_option("b", opt->b, "Stop tag file; omit for an autocorrelation")->check(CLI::ExistingFile);
  app->add_option("--a-channel", opt->a_channel, "Channel to use from a multi-channel file a");
  app->add_option("--b-channel", opt->b_channel, "Channel to use from a multi-channel file b");
  app->add_option("--mode", opt->mode, "start-stop or windowed")->capture_default_str();
  app->add_option("--bin", opt->bin, "Bin width, seconds")->capture_default_str();
  app->add_option("--max-lag", opt->max_lag, "Largest |tau|, seconds")->capture_default_str();
  app->add_option("-o,--out", opt->out, "Output prefix (.csv, .json, .manifest.json)")->required();
  return {app, [opt] { run_correlate(*opt); }};
}

Command add_herald(CLI::App& root) {
  auto opt = std::make_shared<HeraldOptions>();
  CLI::App* app = root.add_subcommand("herald", "Idler-conditioned g2 of the two signal detectors");
  app->add_option("--idler", opt->idler, "Idler tag file")->required()->check(CLI::ExistingFile);
  app->add_option("--s1", opt->s1, "First signal tag file")->required()->check(CLI::ExistingFile);
  app->add_option("--s2", opt->s2, "Second signal tag file")->required()->check(CLI::ExistingFile);
  app->add_option("--tau-h", opt->tau_h, "Heralding half-width, seconds")->capture_default_str();
  app->add_option("--bin", opt->bin, "Bin width, seconds")->capture_default_str();
  app->add_option("--max-lag", opt->max_lag, "Largest |t_s1 - t_s2|, seconds (default 2 tau_h)");
  app->add_flag("--surface", opt->surface, "Also write the two-dimensional (tau1, tau2) surface");
  app->add_option("-o,--out", opt->out, "Output prefix")->required();
  return {app, [opt] { run_herald(*opt); }};
}

Command add_fit(CLI::App& root) {
  auto opt = std::make_shared<FitCommandOptions>();
  CLI::App* app = root.add_subcommand("fit", "Fit B + A exp(-lambda |tau|) to g2 curves");
  app->add_option("--cross", opt->cross, "Signal-idler g2 curve CSV")->check(CLI::ExistingFile);
  app->add_option("--auto", opt->autocorr, "Signal autocorrelation g2 curve CSV")->check(CLI::ExistingFile);
  app->add_option("--model", opt->model, "auto, point or binned")->capture_default_str();
  app->add_option("--fix-baseline", opt->fix_baseline, "Hold B fixed at this value");
  app->add_flag("--exclude-center", opt->exclude_center, "Ignore the tau = 0 bin");
  app->add_option("-o,--out", opt->out, "Report JSON path")->required();
  return {app, [opt] { run_fit(*opt); }};
}

}  // namespace spdc::cli
