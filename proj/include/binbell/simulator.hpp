#pragma once

// Monte Carlo time-tag generator for the four-detector setup.
//
// Pairs are emitted as a Poisson process at `pair_rate` inside periodic active
// windows (duty cycle xi of `window_period`). Each pair produces a Stokes tag at
// the emission time and an anti-Stokes tag one sampled delay later; each tag
// survives with probability sqrt(eta). Channel signs follow
// P(X, Y) = [1 + XY cos(theta)]/4 with theta the beat phase at the sampled
// delay. Uncorrelated singles run continuously on every channel.
//
// The run is cut into fixed-length time shards; every shard draws from its own
// derived random streams, so the output depends only on (seed, config) and not
// on the number of worker threads.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "binbell/model.hpp"
#include "binbell/rng.hpp"
#include "binbell/timetag.hpp"

namespace binbell {

/// Inverse-CDF sampler for the true-pair delay density (G0 - N0)/area.
class PairDelaySampler {
 public:
  static constexpr std::size_t kDefaultTableSize = 10000;

  explicit PairDelaySampler(const WavepacketModel& model,
                            std::size_t table_size = kDefaultTableSize);

  double sample(Rng& rng) const;
  /// Piecewise-linear CDF of the table.
  double cdf(double tau) const;
  double upper_delay() const { return delays_.back(); }
  std::span<const double> delays() const { return delays_; }
  std::span<const double> cumulative() const { return cumulative_; }

 private:
  std::vector<double> delays_;
  std::vector<double> cumulative_;
};

double sample_pair_delay(const PairDelaySampler& sampler, Rng& rng);

/// Draws (X, Y) with P = [1 + XY cos(theta)]/4; X is a fair coin.
ChannelPair assign_channels(double theta, Rng& rng);

struct SimConfig {
  explicit SimConfig(WavepacketModel m) : model(std::move(m)) {}

  WavepacketModel model;
  PhaseSetting phases;
  ExperimentPlan plan;
  double pair_rate = 0.0;                        // s^-1 inside active windows
  std::array<double, kChannelCount> singles_rates{};  // detected s^-1, indexed by Channel
  std::uint64_t seed = 0;
  double window_period = 10e-6;
  double shard_length = 1.0;
  std::uint64_t config_digest = 0;

  /// Pair rate whose detected coincidences reproduce G0 - N0.
  static double matched_pair_rate(const WavepacketModel& model);
  /// Equal singles rate that brings the accidental density up to N0*eta*xi.
  static double matched_singles_rate(const WavepacketModel& model, const ExperimentPlan& plan,
                                     double pair_rate);
  /// Config whose pair and singles rates reproduce the model (equal singles on all channels).
  static SimConfig matched(const WavepacketModel& model, const PhaseSetting& phases,
                           const ExperimentPlan& plan, std::uint64_t seed);

  /// Accidental coincidence density expected between two channels, s^-2, counting
  /// pair photons whose partner was lost as singles too.
  double implied_accidental_density(Channel stokes, Channel anti_stokes) const;
  /// Checks rates, plan, and that every channel pair reproduces N0*eta*xi to 1%.
  void validate() const;

  std::uint64_t run_length_ticks() const;
};

using EventSink = std::function<void(std::span<const DetectionEvent>)>;

/// Streams the run to `sink` in time order, one chunk per shard.
StreamHeader simulate_streaming(const SimConfig& config, const EventSink& sink,
                                unsigned threads = 1);

TimeTagStream simulate_run(const SimConfig& config, unsigned threads = 1);

}  // namespace binbell
