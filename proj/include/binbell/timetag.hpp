#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "binbell/model.hpp"

namespace binbell {

enum class Channel : std::uint8_t {
  StokesPlus = 0,
  StokesMinus = 1,
  AntiStokesPlus = 2,
  AntiStokesMinus = 3,
};

inline constexpr std::size_t kChannelCount = 4;
inline constexpr double kTickSeconds = 1e-12;

constexpr bool is_stokes(Channel c) { return c == Channel::StokesPlus || c == Channel::StokesMinus; }
constexpr int channel_sign(Channel c) {
  return (c == Channel::StokesPlus || c == Channel::AntiStokesPlus) ? 1 : -1;
}
constexpr Channel stokes_channel(int sign) {
  return sign > 0 ? Channel::StokesPlus : Channel::StokesMinus;
}
constexpr Channel anti_stokes_channel(int sign) {
  return sign > 0 ? Channel::AntiStokesPlus : Channel::AntiStokesMinus;
}
std::string_view channel_name(Channel c);

struct DetectionEvent {
  std::uint64_t timestamp = 0;  // ticks
  Channel channel = Channel::StokesPlus;

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
  /// Time order, ties broken by channel number.
  friend bool operator<(const DetectionEvent& a, const DetectionEvent& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.channel < b.channel;
  }
};

struct StreamHeader {
  std::uint16_t tick_ps = 1;
  std::uint64_t run_length = 0;  // ticks
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;

  friend bool operator==(const StreamHeader&, const StreamHeader&) = default;
};

struct TimeTagStream {
  StreamHeader header;
  std::vector<DetectionEvent> events;

  double run_seconds() const { return static_cast<double>(header.run_length) * header.tick_ps * kTickSeconds; }
  bool is_sorted() const;
  std::array<std::uint64_t, kChannelCount> channel_totals() const;

  friend bool operator==(const TimeTagStream&, const TimeTagStream&) = default;
};

}  // namespace binbell
