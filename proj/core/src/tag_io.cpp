#include "spdc/tag_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <string_view>
#include <tuple>

#include "spdc/error.hpp"

namespace spdc::io {
namespace {

template <typename T>
void put_le(std::string& buf, T value) {
  auto u = static_cast<std::uint64_t>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<char>(u & 0xffu));
    u >>= 8;
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  std::uint64_t u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) u = (u << 8) | p[i];
  return static_cast<T>(u);
}

std::uint32_t check_streams(std::span<const TagStream> streams, std::int64_t& tick_ps, std::int64_t& span) {
  if (streams.empty()) throw ContractError("tag file needs at least one stream");
  tick_ps = streams.front().tick_ps;
  span = streams.front().span_ticks;
  std::uint32_t mask = 0;
  for (const TagStream& s : streams) {
    validate_stream(s);
    if (s.tick_ps != tick_ps) throw FormatError("streams in one tag file must share the tick length");
    if (s.span_ticks != span) throw FormatError("streams in one tag file must share the span");
    if (s.channel >= kMaxChannels) throw ContractError("channel ids must be < 32");
    const std::uint32_t bit = 1u << s.channel;
    if (mask & bit) throw ContractError("duplicate channel " + std::to_string(s.channel) + " in tag file");
    mask |= bit;
  }
  if (tick_ps > static_cast<std::int64_t>(UINT32_MAX)) throw ContractError("tick length does not fit the header");
  return mask;
}

// Calls emit(channel, tick) for every tag, merged by (tick, channel).
template <typename F>
void for_each_merged(std::span<const TagStream> streams, F&& emit) {
  using Head = std::tuple<std::int64_t, std::uint8_t, std::size_t>;
  std::priority_queue<Head, std::vector<Head>, std::greater<>> heap;
  std::vector<std::size_t> pos(streams.size(), 0);
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (!streams[i].tags.empty()) heap.emplace(streams[i].tags[0], streams[i].channel, i);
  }
  while (!heap.empty()) {
    const auto [tick, channel, i] = heap.top();
    heap.pop();
    emit(channel, tick);
    if (++pos[i] < streams[i].tags.size()) heap.emplace(streams[i].tags[pos[i]], channel, i);
  }
}

std::vector<TagStream> make_streams(std::uint32_t mask, std::int64_t tick_ps, std::int64_t span) {
  std::vector<TagStream> out;
  for (int c = 0; c < kMaxChannels; ++c) {
    if (mask & (1u << c)) out.push_back({static_cast<std::uint8_t>(c), tick_ps, span, {}});
  }
  return out;
}

TagStream* stream_for(std::vector<TagStream>& streams, unsigned channel) {
  for (TagStream& s : streams) {
    if (s.channel == channel) return &s;
  }
  return nullptr;
}

void append_checked(TagStream& s, std::int64_t tick, const char* what) {
  if (tick < 0 || tick > s.span_ticks) {
    throw FormatError(std::string(what) + ": tick " + std::to_string(tick) + " outside the span");
  }
  if (!s.tags.empty() && tick < s.tags.back()) {
    throw FormatError(std::string(what) + ": unsorted ticks on channel " + std::to_string(s.channel));
  }
  s.tags.push_back(tick);
}

template <typename T>
T parse_int(std::string_view text, const std::string& where) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw FormatError(where + ": expected an integer, got '" + std::string(text) + "'");
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

}  // namespace

TagFormat format_for(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? TagFormat::Csv : TagFormat::Binary;
}

void write_binary(std::ostream& out, std::span<const TagStream> streams) {
  std::int64_t tick_ps = 0;
  std::int64_t span = 0;
  const std::uint32_t mask = check_streams(streams, tick_ps, span);
  std::uint64_t total = 0;
  for (const TagStream& s : streams) total += s.tags.size();

  std::string buf(kTagMagic.begin(), kTagMagic.end());
  put_le<std::uint32_t>(buf, kTagFormatVersion);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(tick_ps));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(std::popcount(mask)));
  put_le<std::uint32_t>(buf, mask);
  put_le<std::uint64_t>(buf, static_cast<std::uint64_t>(span));
  put_le<std::uint64_t>(buf, total);
  buf.reserve(kTagHeaderSize + 65536 * kTagRecordSize);
  for_each_merged(streams, [&](std::uint8_t channel, std::int64_t tick) {
    buf.push_back(static_cast<char>(channel));
    put_le<std::uint64_t>(buf, static_cast<std::uint64_t>(tick));
    if (buf.size() >= 65536 * kTagRecordSize) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  });
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError("failed to write tag data");
}

TagFileHeader read_header(std::istream& in) {
  std::array<unsigned char, kTagHeaderSize> raw{};
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw FormatError("tag file: truncated header");
  if (!std::equal(kTagMagic.begin(), kTagMagic.end(), raw.begin(),
                  [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; })) {
    throw FormatError("tag file: bad magic");
  }
  TagFileHeader h;
  h.version = get_le<std::uint32_t>(raw.data() + 8);
  h.tick_ps = get_le<std::uint32_t>(raw.data() + 12);
  h.channel_count = get_le<std::uint32_t>(raw.data() + 16);
  h.channel_mask = get_le<std::uint32_t>(raw.data() + 20);
  const auto span = get_le<std::uint64_t>(raw.data() + 24);
  h.record_count = get_le<std::uint64_t>(raw.data() + 32);
  if (h.version != kTagFormatVersion) {
    throw FormatError("tag file: unsupported version " + std::to_string(h.version));
  }
  if (h.tick_ps <= 0) throw FormatError("tag file: tick must be > 0");
  if (span > static_cast<std::uint64_t>(INT64_MAX)) throw FormatError("tag file: span out of range");
  h.span_ticks = static_cast<std::int64_t>(span);
  if (static_cast<std::uint32_t>(std::popcount(h.channel_mask)) != h.channel_count || h.channel_count == 0) {
    throw FormatError("tag file: channel count does not match the channel mask");
  }
  return h;
}

std::vector<TagStream> read_binary(std::istream& in) {
  const TagFileHeader h = read_header(in);
  std::vector<TagStream> streams = make_streams(h.channel_mask, h.tick_ps, h.span_ticks);
  constexpr std::size_t kChunk = 65536;
  std::vector<unsigned char> buf(kChunk * kTagRecordSize);
  std::uint64_t remaining = h.record_count;
  while (remaining > 0) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, kChunk));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * kTagRecordSize));
    if (in.gcount() != static_cast<std::streamsize>(n * kTagRecordSize)) {
      throw FormatError("tag file: payload shorter than the declared record count");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned char* rec = buf.data() + i * kTagRecordSize;
      const unsigned channel = rec[0];
      TagStream* s = channel < kMaxChannels && (h.channel_mask & (1u << channel)) ? stream_for(streams, channel)
                                                                                     : nullptr;
      if (s == nullptr) throw FormatError("tag file: record on undeclared channel " + std::to_string(channel));
      const auto tick = get_le<std::uint64_t>(rec + 1);
      if (tick > static_cast<std::uint64_t>(INT64_MAX)) throw FormatError("tag file: tick out of range");
      append_checked(*s, static_cast<std::int64_t>(tick), "tag file");
    }
    remaining -= n;
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("tag file: payload longer than the declared record count");
  }
  return streams;
}

void write_csv(std::ostream& out, std::span<const TagStream> streams) {
  std::int64_t tick_ps = 0;
  std::int64_t span = 0;
  const std::uint32_t mask = check_streams(streams, tick_ps, span);
  std::string buf = "# spdc tags v" + std::to_string(kTagFormatVersion) + "\n# tick_ps=" + std::to_string(tick_ps) +
                    "\n# span_ticks=" + std::to_string(span) + "\n# channels=";
  bool first = true;
  for (int c = 0; c < kMaxChannels; ++c) {
    if (mask & (1u << c)) {
      if (!first) buf += ';';
      buf += std::to_string(c);
      first = false;
    }
  }
  buf += "\nchannel,tick\n";
  for_each_merged(streams, [&](std::uint8_t channel, std::int64_t tick) {
    buf += std::to_string(channel);
    buf += ',';
    buf += std::to_string(tick);
    buf += '\n';
    if (buf.size() > (1u << 20)) {
      out << buf;
      buf.clear();
    }
  });
  out << buf;
  if (!out) throw FormatError("failed to write tag data");
}

std::vector<TagStream> read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::int64_t> tick_ps;
  std::optional<std::int64_t> span;
  std::optional<std::uint32_t> mask;
  bool have_columns = false;
  std::vector<TagStream> streams;
  auto where = [&] { return "tag csv line " + std::to_string(line_no); };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      if (have_columns) throw FormatError(where() + ": metadata after the column header");
      const std::string_view body = trim(text.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string_view key = body.substr(0, eq);
      const std::string_view value = body.substr(eq + 1);
      if (key == "tick_ps") {
        tick_ps = parse_int<std::int64_t>(value, where());
      } else if (key == "span_ticks") {
        span = parse_int<std::int64_t>(value, where());
      } else if (key == "channels") {
        std::uint32_t m = 0;
        std::string_view rest = value;
        while (!rest.empty()) {
          const auto sep = rest.find(';');
          const int c = parse_int<int>(rest.substr(0, sep), where());
          if (c < 0 || c >= kMaxChannels) throw FormatError(where() + ": channel ids must be in 0..31");
          m |= 1u << c;
          rest = sep == std::string_view::npos ? std::string_view{} : rest.substr(sep + 1);
        }
        mask = m;
      }
      continue;
    }
    if (!have_columns) {
      if (text != "channel,tick") throw FormatError(where() + ": expected header 'channel,tick'");
      if (!tick_ps || !span || !mask) {
        throw FormatError(where() + ": missing '# tick_ps=', '# span_ticks=' or '# channels=' metadata");
      }
      if (*tick_ps <= 0) throw FormatError("tag csv: tick must be > 0");
      if (*span < 0) throw FormatError("tag csv: span must be >= 0");
      if (*mask == 0) throw FormatError("tag csv: no channels declared");
      streams = make_streams(*mask, *tick_ps, *span);
      have_columns = true;
      continue;
    }
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) throw FormatError(where() + ": expected 'channel,tick'");
    const auto channel = parse_int<unsigned>(text.substr(0, comma), where());
    const auto tick = parse_int<std::int64_t>(text.substr(comma + 1), where());
    TagStream* s = channel < kMaxChannels ? stream_for(streams, channel) : nullptr;
    if (s == nullptr) throw FormatError(where() + ": record on undeclared channel " + std::to_string(channel));
    append_checked(*s, tick, where().c_str());
  }
  if (!have_columns) throw FormatError("tag csv: missing column header");
  return streams;
}

void write_tags(const std::filesystem::path& path, std::span<const TagStream> streams) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  if (format_for(path) == TagFormat::Csv) {
    write_csv(out, streams);
  } else {
    write_binary(out, streams);
  }
}

void write_tags(const std::filesystem::path& path, const TagStream& stream) {
  write_tags(path, std::span<const TagStream>(&stream, 1));
}

std::vector<TagStream> read_tags(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open tag file " + path.string());
  return format_for(path) == TagFormat::Csv ? read_csv(in) : read_binary(in);
}

TagStream read_single(const std::filesystem::path& path) {
  std::vector<TagStream> streams = read_tags(path);
  if (streams.size() != 1) {
    throw FormatError(path.string() + " holds " + std::to_string(streams.size()) + " channels; expected one");
  }
  return std::move(streams.front());
}

TagStream read_channel(const std::filesystem::path& path, int channel) {
  for (TagStream& s : read_tags(path)) {
    if (s.channel == channel) return std::move(s);
  }
  throw FormatError(path.string() + " has no channel " + std::to_string(channel));
}

}  // namespace spdc::io
