#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "spdc/source.hpp"

namespace spdc::io {

/// Detector defaults used when a config omits a field: 7.5% efficiency,
/// 10 us dead time, no dark counts, 162 ps tick.
sim::DetectorParams default_detector() noexcept;

/// Parses a JSON simulation config. Unknown fields, wrong types and invalid
/// values raise ConfigError naming the offending field path; malformed JSON
/// raises FormatError with the line and column.
///
/// {
///   "duration_s": 200, "seed": 1, "splitter_ratio": 0.5, "ideal_tick_ps": 1,
///   "source": {"model": "pair_poisson", "pair_rate_hz": 1e5,
///              "bandwidth_hz": 13e6 | "gamma_per_s": ..., "n_modes": 1,
///              "gamma_auto_per_s": ...},
///   "detectors": {"default": {...}, "idler": {...}, "s1": {...}, "s2": {...}}
/// }
/// Detector blocks take efficiency, dead_time_s, dark_rate_hz, tick_ps; the
/// per-channel blocks override "default".
sim::SimConfig parse_sim_config(std::string_view json_text);
sim::SimConfig load_sim_config(const std::filesystem::path& path);

/// Canonical JSON with every field spelled out (pretty-printed, stable order).
std::string sim_config_to_json(const sim::SimConfig& cfg);

std::string to_string(sim::SourceModel model);

}  // namespace spdc::io
