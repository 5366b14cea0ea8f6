#include "output.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>

#include "spdc/error.hpp"
#include "spdc/tag_io.hpp"

namespace spdc::cli {

std::string fmt(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string sha256_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error(ErrorKind::Format, "sha256 init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

OutputSet::~OutputSet() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& t : temps_) std::filesystem::remove(t, ec);
}

std::filesystem::path OutputSet::stage(const std::filesystem::path& final_path) {
  if (final_path.has_parent_path()) std::filesystem::create_directories(final_path.parent_path());
  std::filesystem::path tmp = final_path;
  tmp += ".partial";
  finals_.push_back(final_path);
  temps_.push_back(tmp);
  return tmp;
}

void OutputSet::write_text(const std::filesystem::path& final_path, const std::string& text) {
  const auto tmp = stage(final_path);
  std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw ConfigError("cannot write " + final_path.string());
}

void OutputSet::write_tags(const std::filesystem::path& final_path, std::span<const TagStream> streams) {
  const auto tmp = stage(final_path);
  std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + final_path.string());
  if (io::format_for(final_path) == io::TagFormat::Csv) {
    io::write_csv(out, streams);
  } else {
    io::write_binary(out, streams);
  }
}

void OutputSet::add_input(const std::filesystem::path& path) { inputs_.push_back(path); }

void OutputSet::commit(const std::filesystem::path& manifest_path, nlohmann::ordered_json manifest) {
  const auto base = manifest_path.has_parent_path() ? manifest_path.parent_path() : std::filesystem::path(".");
  auto inputs = nlohmann::ordered_json::array();
  // Paths are stored relative to the manifest so reruns elsewhere compare equal.
  for (const auto& p : inputs_) {
    inputs.push_back({{"path", std::filesystem::proximate(p, base).generic_string()}, {"sha256", sha256_hex(p)}});
  }
  auto outputs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < finals_.size(); ++i) {
    const auto rel = std::filesystem::proximate(finals_[i], base);
    outputs.push_back({{"path", rel.generic_string()},
                       {"bytes", std::filesystem::file_size(temps_[i])},
                       {"sha256", sha256_hex(temps_[i])}});
  }
  manifest["inputs"] = inputs;
  manifest["outputs"] = outputs;
  write_text(manifest_path, manifest.dump(2) + "\n");
  for (std::size_t i = 0; i < finals_.size(); ++i) std::filesystem::rename(temps_[i], finals_[i]);
  committed_ = true;
}

nlohmann::ordered_json manifest_base(const std::string& command) {
  nlohmann::ordered_json m;
  m["tool"] = "spdc";
  m["version"] = SPDC_VERSION;
  m["command"] = command;
  return m;
}

}  // namespace spdc::cli
