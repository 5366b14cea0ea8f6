#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>

#include "commands.hpp"
#include "spdc/error.hpp"

namespace spdc::cli {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SPDC_LOG");
    if (env == nullptr) return LogLevel::Info;
    if (std::strcmp(env, "quiet") == 0 || std::strcmp(env, "0") == 0) return LogLevel::Quiet;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return level;
}

void log_info(const std::string& message) {
  if (log_level() != LogLevel::Quiet) std::cerr << "spdc: " << message << '\n';
}

void log_warn(const std::string& message) { std::cerr << "spdc: warning: " << message << '\n'; }

int run(int argc, char** argv) {
  CLI::App app{"Cavity SPDC photon-pair simulator and correlation analysis"};
  app.set_version_flag("--version", SPDC_VERSION);
  app.require_subcommand(1);
  std::vector<Command> commands{add_simulate(app), add_pump_scan(app), add_correlate(app), add_herald(app),
                                add_fit(app),      add_design(app),    add_convert(app)};
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    for (const Command& c : commands) {
      if (c.app->parsed()) c.run();
    }
  } catch (const Error& e) {
    std::cerr << "spdc: " << to_string(e.kind()) << " error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::Config: return kExitConfig;
      case ErrorKind::Format: return kExitFormat;
      case ErrorKind::Numerical: return kExitNumerical;
      case ErrorKind::Contract: return kExitContract;
    }
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "spdc: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "spdc: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace spdc::cli
