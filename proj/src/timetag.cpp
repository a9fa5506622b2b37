#include "binbell/timetag.hpp"

#include <algorithm>

namespace binbell {

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::StokesPlus: return "s+";
    case Channel::StokesMinus: return "s-";
    case Channel::AntiStokesPlus: return "as+";
    case Channel::AntiStokesMinus: return "as-";
  }
  return "?";
}

bool TimeTagStream::is_sorted() const { return std::is_sorted(events.begin(), events.end()); }

std::array<std::uint64_t, kChannelCount> TimeTagStream::channel_totals() const {
  std::array<std::uint64_t, kChannelCount> totals{};
  for (const auto& e : events) ++totals[static_cast<std::size_t>(e.channel)];
  return totals;
}

}  // namespace binbell
