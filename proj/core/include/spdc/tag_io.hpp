#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "spdc/tag_stream.hpp"

namespace spdc::io {

inline constexpr std::array<char, 8> kTagMagic{'S', 'P', 'D', 'C', 'T', 'A', 'G', 'S'};
inline constexpr std::uint32_t kTagFormatVersion = 1;
inline constexpr std::size_t kTagHeaderSize = 40;
inline constexpr std::size_t kTagRecordSize = 9;
inline constexpr int kMaxChannels = 32;

/// Binary layout, all little-endian:
///   magic[8] | u32 version | u32 tick_ps | u32 channel_count | u32 channel_mask
///   | u64 span_ticks | u64 record_count
/// followed by record_count records of (u8 channel, u64 tick), time ordered.
/// channel_mask has bit c set for every channel c stored in the file, so empty
/// streams survive a round trip.
struct TagFileHeader {
  std::uint32_t version = kTagFormatVersion;
  std::int64_t tick_ps = 162;
  std::uint32_t channel_count = 0;
  std::uint32_t channel_mask = 0;
  std::int64_t span_ticks = 0;
  std::uint64_t record_count = 0;
};

enum class TagFormat { Binary, Csv };

/// .csv (any case) selects CSV, anything else the binary format.
TagFormat format_for(const std::filesystem::path& path);

/// Streams must have distinct channels < 32 and share tick and span.
/// Records are written merged by (tick, channel).
void write_binary(std::ostream& out, std::span<const TagStream> streams);
void write_csv(std::ostream& out, std::span<const TagStream> streams);

/// One stream per declared channel, in ascending channel order. Throws
/// FormatError for a bad magic/version, truncated payload, count mismatch,
/// undeclared channels, unsorted or out-of-span ticks.
std::vector<TagStream> read_binary(std::istream& in);
std::vector<TagStream> read_csv(std::istream& in);

TagFileHeader read_header(std::istream& in);

void write_tags(const std::filesystem::path& path, std::span<const TagStream> streams);
void write_tags(const std::filesystem::path& path, const TagStream& stream);
std::vector<TagStream> read_tags(const std::filesystem::path& path);
/// The file must hold exactly one channel.
TagStream read_single(const std::filesystem::path& path);
/// Picks one channel out of a multi-channel file.
TagStream read_channel(const std::filesystem::path& path, int channel);

}  // namespace spdc::io
