#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "franson/interferometer.hpp"

namespace franson::timetag {

using interferometer::Detector;

struct TimeTagStream {
  Detector channel = Detector::kA1;
  /// Picoseconds, strictly increasing for physical tags.
  std::vector<std::uint64_t> timestamps;
};

/// "QTTAGS01", u32 channel count, then {u8 channel, u64 ps} records, all
/// little-endian. Records are written in time order across channels.
void write_qtt(const std::filesystem::path& path, const std::vector<TimeTagStream>& streams);
/// CSV with a "channel,timestamp_ps" header; channels written as A1..B2.
void write_csv(const std::filesystem::path& path, const std::vector<TimeTagStream>& streams);

/// One stream per channel present, in channel order. Throws std::runtime_error
/// on a malformed file.
std::vector<TimeTagStream> read_qtt(const std::filesystem::path& path);
/// Accepts channel names (A1..B2) or numbers (0..3).
std::vector<TimeTagStream> read_csv(const std::filesystem::path& path);
/// Dispatches on the file magic.
std::vector<TimeTagStream> read_tags(const std::filesystem::path& path);

/// Stream for one channel; empty when the channel has no records.
TimeTagStream find_channel(const std::vector<TimeTagStream>& streams, Detector channel);

}  // namespace franson::timetag
