#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdc/correlator.hpp"

namespace spdc::cli {

enum class LogLevel { Quiet, Info, Debug };
LogLevel log_level();
void log_info(const std::string& message);
void log_warn(const std::string& message);

/// A registered subcommand: CLI11 options bound to its own settings, plus the
/// action run after a successful parse.
struct Command {
  CLI::App* app = nullptr;
  std::function<void()> run;
};

Command add_simulate(CLI::App& root);
Command add_pump_scan(CLI::App& root);
Command add_correlate(CLI::App& root);
Command add_herald(CLI::App& root);
Command add_fit(CLI::App& root);
Command add_design(CLI::App& root);
Command add_convert(CLI::App& root);

/// Curve CSV: "# bin_width_s=<w>" then columns tau_s,g2,stderr,counts.
std::string curve_csv(const corr::G2Curve& curve);
corr::G2Curve read_curve_csv(const std::filesystem::path& path);

/// Runs the tool; returns the process exit code.
int run(int argc, char** argv);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitFormat = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitContract = 5;
inline constexpr int kExitInternal = 70;

}  // namespace spdc::cli
