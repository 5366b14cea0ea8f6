#include "spdc/sim_config_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "spdc/error.hpp"

namespace spdc::io {
namespace {

using nlohmann::ordered_json;

void reject_unknown(const ordered_json& obj, const std::string& path, std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(path + key + ": unknown field");
    }
  }
}

const ordered_json& object_at(const ordered_json& parent, const std::string& key, const std::string& path) {
  const auto& v = parent.at(key);
  if (!v.is_object()) throw ConfigError(path + key + ": expected an object");
  return v;
}

double number_at(const ordered_json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path + key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + key + ": must be finite");
  return x;
}

template <typename T>
T integer_at(const ordered_json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
  if (v.is_number_integer()) {
    const auto x = v.get<std::int64_t>();
    if (std::is_unsigned_v<T> && x < 0) throw ConfigError(path + key + ": must be >= 0");
    return static_cast<T>(x);
  }
  throw ConfigError(path + key + ": expected an integer");
}

sim::DetectorParams parse_detector(const ordered_json& obj, const std::string& path, sim::DetectorParams d) {
  reject_unknown(obj, path, {"efficiency", "dead_time_s", "dark_rate_hz", "tick_ps"});
  if (obj.contains("efficiency")) d.efficiency = number_at(obj, "efficiency", path);
  if (obj.contains("dead_time_s")) d.dead_time = number_at(obj, "dead_time_s", path);
  if (obj.contains("dark_rate_hz")) d.dark_rate = number_at(obj, "dark_rate_hz", path);
  if (obj.contains("tick_ps")) d.tick = static_cast<double>(integer_at<std::int64_t>(obj, "tick_ps", path)) * 1e-12;
  try {
    d.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path.substr(0, path.size() - 1) + ": " + e.what());
  }
  return d;
}

sim::SourceModel parse_model(const ordered_json& v, const std::string& path) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "pair_poisson") return sim::SourceModel::PairPoisson;
    if (s == "clustered_multimode") return sim::SourceModel::ClusteredMultimode;
  }
  throw ConfigError(path + "model: expected \"pair_poisson\" or \"clustered_multimode\"");
}

sim::SourceParams parse_source(const ordered_json& obj, const std::string& path) {
  reject_unknown(obj, path,
                 {"model", "pair_rate_hz", "bandwidth_hz", "gamma_per_s", "n_modes", "gamma_auto_per_s"});
  sim::SourceParams s;
  if (obj.contains("model")) s.model = parse_model(obj["model"], path);
  if (!obj.contains("pair_rate_hz")) throw ConfigError(path + "pair_rate_hz: missing");
  s.pair_rate = number_at(obj, "pair_rate_hz", path);
  const bool has_bw = obj.contains("bandwidth_hz");
  const bool has_gamma = obj.contains("gamma_per_s");
  if (has_bw == has_gamma) throw ConfigError(path + "bandwidth_hz: give exactly one of bandwidth_hz or gamma_per_s");
  s.gamma = has_bw ? sim::SourceParams::gamma_from_bandwidth(number_at(obj, "bandwidth_hz", path))
                   : number_at(obj, "gamma_per_s", path);
  if (obj.contains("n_modes")) s.n_modes = integer_at<int>(obj, "n_modes", path);
  if (obj.contains("gamma_auto_per_s")) s.gamma_auto = number_at(obj, "gamma_auto_per_s", path);
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path.substr(0, path.size() - 1) + ": " + e.what());
  }
  return s;
}

ordered_json detector_json(const sim::DetectorParams& d) {
  ordered_json j;
  j["efficiency"] = d.efficiency;
  j["dead_time_s"] = d.dead_time;
  j["dark_rate_hz"] = d.dark_rate;
  j["tick_ps"] = d.tick_ps();
  return j;
}

}  // namespace

sim::DetectorParams default_detector() noexcept { return sim::DetectorParams{0.075, 10e-6, 0.0, 162e-12}; }

std::string to_string(sim::SourceModel model) {
  return model == sim::SourceModel::PairPoisson ? "pair_poisson" : "clustered_multimode";
}

sim::SimConfig parse_sim_config(std::string_view json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    // Translate the byte offset into a line/column for the message.
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < json_text.size(); ++i) {
      if (json_text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw FormatError("config: JSON syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(doc, "", {"duration_s", "seed", "splitter_ratio", "ideal_tick_ps", "source", "detectors"});

  sim::SimConfig cfg;
  cfg.idler_detector = cfg.signal1_detector = cfg.signal2_detector = default_detector();
  if (!doc.contains("duration_s")) throw ConfigError("duration_s: missing");
  cfg.duration = number_at(doc, "duration_s", "");
  if (doc.contains("seed")) cfg.seed = integer_at<std::uint64_t>(doc, "seed", "");
  if (doc.contains("splitter_ratio")) cfg.splitter_ratio = number_at(doc, "splitter_ratio", "");
  if (doc.contains("ideal_tick_ps")) cfg.ideal_tick_ps = integer_at<std::int64_t>(doc, "ideal_tick_ps", "");
  if (!doc.contains("source")) throw ConfigError("source: missing");
  cfg.source = parse_source(object_at(doc, "source", ""), "source.");

  if (doc.contains("detectors")) {
    const auto& dets = object_at(doc, "detectors", "");
    reject_unknown(dets, "detectors.", {"default", "idler", "s1", "s2"});
    sim::DetectorParams base = default_detector();
    if (dets.contains("default")) {
      base = parse_detector(object_at(dets, "default", "detectors."), "detectors.default.", base);
    }
    cfg.idler_detector = cfg.signal1_detector = cfg.signal2_detector = base;
    if (dets.contains("idler")) {
      cfg.idler_detector = parse_detector(object_at(dets, "idler", "detectors."), "detectors.idler.", base);
    }
    if (dets.contains("s1")) {
      cfg.signal1_detector = parse_detector(object_at(dets, "s1", "detectors."), "detectors.s1.", base);
    }
    if (dets.contains("s2")) {
      cfg.signal2_detector = parse_detector(object_at(dets, "s2", "detectors."), "detectors.s2.", base);
    }
  }
  cfg.validate();
  return cfg;
}

sim::SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_sim_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string sim_config_to_json(const sim::SimConfig& cfg) {
  ordered_json j;
  j["duration_s"] = cfg.duration;
  j["seed"] = cfg.seed;
  j["splitter_ratio"] = cfg.splitter_ratio;
  j["ideal_tick_ps"] = cfg.ideal_tick_ps;
  ordered_json s;
  s["model"] = to_string(cfg.source.model);
  s["pair_rate_hz"] = cfg.source.pair_rate;
  s["gamma_per_s"] = cfg.source.gamma;
  s["n_modes"] = cfg.source.n_modes;
  if (cfg.source.gamma_auto) s["gamma_auto_per_s"] = *cfg.source.gamma_auto;
  j["source"] = s;
  ordered_json d;
  d["idler"] = detector_json(cfg.idler_detector);
  d["s1"] = detector_json(cfg.signal1_detector);
  d["s2"] = detector_json(cfg.signal2_detector);
  j["detectors"] = d;
  return j.dump(2) + "\n";
}

}  // namespace spdc::io
