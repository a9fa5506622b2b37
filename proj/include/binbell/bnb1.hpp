#pragma once

// "BNB1" time-tag files.
//
//   offset  size  field
//   0       4     magic "BNB1"
//   4       2     version (u16 LE), currently 1
//   6       2     tick length in picoseconds (u16 LE)
//   8       8     reserved; carries the config digest (u64 LE), 0 when unknown
//   16      9*n   records: code u8, payload u64 LE
//
// Record codes 0..3 are detections on s+, s-, as+, as- with the payload as
// timestamp. Codes 0xF0 (run length in ticks) and 0xF1 (seed) are metadata
// written before the first detection; other codes >= 0x80 are skipped on read.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>

#include "binbell/timetag.hpp"

namespace binbell {

inline constexpr std::uint16_t kBnb1Version = 1;
inline constexpr std::size_t kBnb1HeaderSize = 16;
inline constexpr std::size_t kBnb1RecordSize = 9;
inline constexpr std::uint8_t kRecordRunLength = 0xF0;
inline constexpr std::uint8_t kRecordSeed = 0xF1;

/// Incremental writer: header and metadata on construction, then chunks of events.
class Bnb1Writer {
 public:
  Bnb1Writer(std::ostream& out, const StreamHeader& header);
  void write(std::span<const DetectionEvent> events);
  std::uint64_t records_written() const { return records_; }

 private:
  std::ostream& out_;
  std::uint64_t records_ = 0;
};

void write_bnb1(std::ostream& out, const TimeTagStream& stream);
TimeTagStream read_bnb1(std::istream& in);

void save_bnb1(const std::filesystem::path& path, const TimeTagStream& stream);
TimeTagStream load_bnb1(const std::filesystem::path& path);

}  // namespace binbell
