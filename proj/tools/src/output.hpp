#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdc/tag_stream.hpp"

namespace spdc::cli {

/// Shortest round-trip decimal form; identical across runs and platforms.
std::string fmt(double value);

std::string sha256_hex(const std::filesystem::path& path);

/// Files produced by one command. Everything is written to temporaries and
/// only renamed into place by commit(); an exception before that leaves no
/// partial outputs behind.
class OutputSet {
 public:
  OutputSet() = default;
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet();

  /// Returns the temporary path to write `final_path` into.
  std::filesystem::path stage(const std::filesystem::path& final_path);
  void write_text(const std::filesystem::path& final_path, const std::string& text);
  void write_tags(const std::filesystem::path& final_path, std::span<const TagStream> streams);

  /// Records an input file whose digest goes into the manifest.
  void add_input(const std::filesystem::path& path);

  /// Writes the manifest (listing all staged outputs) next to them and
  /// renames everything into place.
  void commit(const std::filesystem::path& manifest_path, nlohmann::ordered_json manifest);

  const std::vector<std::filesystem::path>& outputs() const noexcept { return finals_; }

 private:
  std::vector<std::filesystem::path> finals_;
  std::vector<std::filesystem::path> temps_;
  std::vector<std::filesystem::path> inputs_;
  bool committed_ = false;
};

/// Manifest skeleton: tool, version, command.
nlohmann::ordered_json manifest_base(const std::string& command);

}  // namespace spdc::cli
