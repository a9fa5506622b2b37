#pragma once

// Seeded random streams for the simulator.
//
// Every independent source of randomness (the pair process and each singles
// channel, per time shard) draws from its own Mersenne Twister whose seed is
// derived from (run seed, shard, stream class) with SplitMix64. Changing one
// class, e.g. switching accidentals on, leaves the other streams untouched.

#include <cmath>
#include <cstdint>
#include <random>

namespace binbell {

enum class StreamClass : std::uint64_t {
  Pairs = 1,
  SinglesStokesPlus = 2,
  SinglesStokesMinus = 3,
  SinglesAntiStokesPlus = 4,
  SinglesAntiStokesMinus = 5,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t shard, StreamClass cls) {
  return splitmix64(splitmix64(splitmix64(seed) ^ shard) ^ static_cast<std::uint64_t>(cls));
}

/// Thin wrapper giving platform-independent uniform and exponential variates.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log(uniform()) / rate; }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace binbell
