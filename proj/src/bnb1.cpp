#include "binbell/bnb1.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "binbell/errors.hpp"

namespace binbell {

namespace {

constexpr std::array<char, 4> kMagic{'B', 'N', 'B', '1'};

template <typename T>
void put_le(char* dst, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    dst[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFFu);
  }
}

template <typename T>
T get_le(const char* src) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(src[i])) << (8 * i);
  }
  return static_cast<T>(v);
}

void put_record(std::ostream& out, std::uint8_t code, std::uint64_t payload) {
  std::array<char, kBnb1RecordSize> rec{};
  rec[0] = static_cast<char>(code);
  put_le(rec.data() + 1, payload);
  out.write(rec.data(), rec.size());
}

}  // namespace

Bnb1Writer::Bnb1Writer(std::ostream& out, const StreamHeader& header) : out_(out) {
  std::array<char, kBnb1HeaderSize> buf{};
  std::memcpy(buf.data(), kMagic.data(), kMagic.size());
  put_le(buf.data() + 4, kBnb1Version);
  put_le(buf.data() + 6, header.tick_ps);
  put_le(buf.data() + 8, header.config_digest);
  out_.write(buf.data(), buf.size());
  put_record(out_, kRecordRunLength, header.run_length);
  put_record(out_, kRecordSeed, header.seed);
  if (!out_) throw DataError("failed to write BNB1 header");
}

void Bnb1Writer::write(std::span<const DetectionEvent> events) {
  std::vector<char> buf(events.size() * kBnb1RecordSize);
  char* p = buf.data();
  for (const auto& e : events) {
    p[0] = static_cast<char>(e.channel);
    put_le(p + 1, e.timestamp);
    p += kBnb1RecordSize;
  }
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out_) throw DataError("failed to write BNB1 records");
  records_ += events.size();
}

void write_bnb1(std::ostream& out, const TimeTagStream& stream) {
  Bnb1Writer writer(out, stream.header);
  writer.write(stream.events);
}

TimeTagStream read_bnb1(std::istream& in) {
  std::array<char, kBnb1HeaderSize> head{};
  in.read(head.data(), head.size());
  if (in.gcount() != static_cast<std::streamsize>(head.size())) {
    throw DataError("truncated BNB1 header");
  }
  if (std::memcmp(head.data(), kMagic.data(), kMagic.size()) != 0) {
    throw DataError("bad magic: not a BNB1 time-tag file");
  }
  const auto version = get_le<std::uint16_t>(head.data() + 4);
  if (version != kBnb1Version) {
    throw DataError("unsupported BNB1 version " + std::to_string(version));
  }
  TimeTagStream stream;
  stream.header.tick_ps = get_le<std::uint16_t>(head.data() + 6);
  stream.header.config_digest = get_le<std::uint64_t>(head.data() + 8);
  if (stream.header.tick_ps == 0) throw DataError("BNB1 tick length is zero");

  constexpr std::size_t kBatch = 1 << 16;
  std::vector<char> buf(kBatch * kBnb1RecordSize);
  bool have_run_length = false;
  for (;;) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got % kBnb1RecordSize != 0) throw DataError("truncated BNB1 record");
    for (std::size_t off = 0; off < got; off += kBnb1RecordSize) {
      const auto code = static_cast<std::uint8_t>(buf[off]);
      const auto payload = get_le<std::uint64_t>(buf.data() + off + 1);
      if (code < kChannelCount) {
        stream.events.push_back({payload, static_cast<Channel>(code)});
      } else if (code == kRecordRunLength) {
        stream.header.run_length = payload;
        have_run_length = true;
      } else if (code == kRecordSeed) {
        stream.header.seed = payload;
      } else if (code < 0x80) {
        throw DataError("invalid BNB1 channel code " + std::to_string(code));
      }
    }
    if (got < buf.size()) break;
  }
  if (!have_run_length && !stream.events.empty()) {
    stream.header.run_length = stream.events.back().timestamp + 1;
  }
  return stream;
}

void save_bnb1(const std::filesystem::path& path, const TimeTagStream& stream) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_bnb1(out, stream);
}

TimeTagStream load_bnb1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_bnb1(in);
}

}  // namespace binbell
