#include "franson/timetag.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace franson::timetag {
namespace {

constexpr char kMagic[8] = {'Q', 'T', 'T', 'A', 'G', 'S', '0', '1'};

template <typename T>
void put_le(std::ostream& os, T v) {
  std::array<char, sizeof(T)> b;
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), b.size());
}

template <typename T>
bool get_le(std::istream& is, T& v) {
  std::array<unsigned char, sizeof(T)> b;
  if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) return false;
  v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[i]) << (8 * i);
  return true;
}

struct Record {
  std::uint64_t ps;
  std::uint8_t channel;
};

std::vector<Record> merged(const std::vector<TimeTagStream>& streams) {
  std::vector<Record> all;
  for (const auto& s : streams) {
    for (auto t : s.timestamps) all.push_back({t, static_cast<std::uint8_t>(s.channel)});
  }
  std::stable_sort(all.begin(), all.end(), [](const Record& a, const Record& b) { return a.ps < b.ps; });
  return all;
}

std::vector<TimeTagStream> collect(const std::map<std::uint8_t, std::vector<std::uint64_t>>& by_channel) {
  std::vector<TimeTagStream> out;
  for (const auto& [c, ts] : by_channel) out.push_back({static_cast<Detector>(c), ts});
  return out;
}

Detector parse_channel(const std::string& s) {
  if (s.size() == 1 && s[0] >= '0' && s[0] <= '3') return static_cast<Detector>(s[0] - '0');
  return interferometer::detector_from_name(s);
}

}  // namespace

void write_qtt(const std::filesystem::path& path, const std::vector<TimeTagStream>& streams) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(streams.size()));
  for (const auto& r : merged(streams)) {
    put_le<std::uint8_t>(os, r.channel);
    put_le<std::uint64_t>(os, r.ps);
  }
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

void write_csv(const std::filesystem::path& path, const std::vector<TimeTagStream>& streams) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "channel,timestamp_ps\n";
  for (const auto& r : merged(streams)) os << interferometer::name(static_cast<Detector>(r.channel)) << ',' << r.ps << '\n';
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

std::vector<TimeTagStream> read_qtt(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw std::runtime_error(path.string() + " is not a QTT1 file");
  }
  std::uint32_t channels = 0;
  if (!get_le(is, channels)) throw std::runtime_error(path.string() + ": truncated header");
  std::map<std::uint8_t, std::vector<std::uint64_t>> by_channel;
  while (true) {
    std::uint8_t c;
    if (!get_le(is, c)) break;
    std::uint64_t ps;
    if (!get_le(is, ps)) throw std::runtime_error(path.string() + ": truncated record");
    if (c > 3) throw std::runtime_error(path.string() + ": channel " + std::to_string(c) + " out of range");
    by_channel[c].push_back(ps);
  }
  if (by_channel.size() > channels) throw std::runtime_error(path.string() + ": more channels than declared");
  return collect(by_channel);
}

std::vector<TimeTagStream> read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "channel,timestamp_ps") {
    throw std::runtime_error(path.string() + ": expected header channel,timestamp_ps");
  }
  std::map<std::uint8_t, std::vector<std::uint64_t>> by_channel;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad row");
    try {
      const auto c = static_cast<std::uint8_t>(parse_channel(line.substr(0, comma)));
      std::size_t used = 0;
      const std::string num = line.substr(comma + 1);
      const auto ps = std::stoull(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing characters");
      by_channel[c].push_back(ps);
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return collect(by_channel);
}

std::vector<TimeTagStream> read_tags(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[8] = {};
  is.read(magic, sizeof magic);
  if (is.gcount() == sizeof magic && std::memcmp(magic, kMagic, sizeof magic) == 0) return read_qtt(path);
  return read_csv(path);
}

TimeTagStream find_channel(const std::vector<TimeTagStream>& streams, Detector channel) {
  for (const auto& s : streams) {
    if (s.channel == channel) return s;
  }
  return {channel, {}};
}

}  // namespace franson::timetag
