#include "binbell/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <string>

#include "binbell/errors.hpp"

namespace binbell {

namespace {

constexpr std::uint64_t kMaxTicks = std::uint64_t{1} << 62;

std::uint64_t to_ticks(double seconds, const char* what) {
  const double ticks = std::round(seconds / kTickSeconds);
  if (!(ticks >= 0.0) || ticks >= static_cast<double>(kMaxTicks)) {
    throw DomainError(std::string(what) + " overflows the tick representation");
  }
  return static_cast<std::uint64_t>(ticks);
}

// Events travel through sorting and merging as (timestamp << 2 | channel),
// which orders exactly like DetectionEvent::operator<.
using Key = std::uint64_t;

constexpr Key make_key(std::uint64_t ticks, Channel c) {
  return (ticks << 2) | static_cast<std::uint64_t>(c);
}
constexpr std::uint64_t key_ticks(Key k) { return k >> 2; }
constexpr DetectionEvent key_event(Key k) {
  return DetectionEvent{k >> 2, static_cast<Channel>(k & 3u)};
}

struct ShardPlan {
  std::uint64_t run_ticks;
  std::uint64_t shard_ticks;
  std::uint64_t period_ticks;
  std::uint64_t active_ticks;
  double survival;  // sqrt(eta) per arm
};

// Active time elapsed before wall time t.
std::uint64_t active_before(std::uint64_t t, const ShardPlan& p) {
  return (t / p.period_ticks) * p.active_ticks + std::min(t % p.period_ticks, p.active_ticks);
}

std::uint64_t wall_from_active(std::uint64_t u, const ShardPlan& p) {
  return (u / p.active_ticks) * p.period_ticks + u % p.active_ticks;
}

std::vector<Key> simulate_shard(const SimConfig& cfg, const PairDelaySampler* sampler,
                                const ShardPlan& p, std::uint64_t shard) {
  const std::uint64_t begin = shard * p.shard_ticks;
  const std::uint64_t end = std::min(begin + p.shard_ticks, p.run_ticks);
  std::vector<Key> keys;

  if (cfg.pair_rate > 0.0 && sampler != nullptr) {
    Rng rng(derive_seed(cfg.seed, shard, StreamClass::Pairs));
    const std::uint64_t a0 = active_before(begin, p);
    const std::uint64_t a1 = active_before(end, p);
    const double delta = cfg.model.beat_frequency();
    const double phase = cfg.phases.difference();
    double elapsed = 0.0;
    for (;;) {
      elapsed += rng.exponential(cfg.pair_rate);
      const double offset = std::floor(elapsed / kTickSeconds);
      if (offset >= static_cast<double>(a1 - a0)) break;
      const std::uint64_t t_s = wall_from_active(a0 + static_cast<std::uint64_t>(offset), p);

      const double tau = sampler->sample(rng);
      const ChannelPair pair = assign_channels(delta * tau + phase, rng);
      const bool keep_s = rng.bernoulli(p.survival);
      const bool keep_as = rng.bernoulli(p.survival);
      if (keep_s) keys.push_back(make_key(t_s, stokes_channel(pair.stokes_sign())));
      if (keep_as) {
        const std::uint64_t t_as = t_s + static_cast<std::uint64_t>(std::llround(tau / kTickSeconds));
        if (t_as < p.run_ticks) keys.push_back(make_key(t_as, anti_stokes_channel(pair.anti_stokes_sign())));
      }
    }
  }

  static constexpr std::array<StreamClass, kChannelCount> kSinglesStreams{
      StreamClass::SinglesStokesPlus, StreamClass::SinglesStokesMinus,
      StreamClass::SinglesAntiStokesPlus, StreamClass::SinglesAntiStokesMinus};
  const double span = static_cast<double>(end - begin);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const double rate = cfg.singles_rates[c];
    if (!(rate > 0.0)) continue;
    Rng rng(derive_seed(cfg.seed, shard, kSinglesStreams[c]));
    double elapsed = 0.0;
    for (;;) {
      elapsed += rng.exponential(rate);
      const double offset = std::floor(elapsed / kTickSeconds);
      if (offset >= span) break;
      keys.push_back(make_key(begin + static_cast<std::uint64_t>(offset), static_cast<Channel>(c)));
    }
  }

  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace

PairDelaySampler::PairDelaySampler(const WavepacketModel& model, std::size_t table_size) {
  if (table_size < 2) throw DomainError("delay table needs at least two points");
  const auto& shape = model.shape();
  const double end = shape.support_end();
  const double total = shape.cumulative(end);
  if (!(model.amplitude() > 0.0) || !(total > 0.0) || !std::isfinite(total)) {
    throw DomainError("no true-pair signal");
  }
  delays_.resize(table_size);
  cumulative_.resize(table_size);
  for (std::size_t i = 0; i < table_size; ++i) {
    const double tau = end * static_cast<double>(i) / static_cast<double>(table_size - 1);
    delays_[i] = tau;
    cumulative_[i] = std::clamp(shape.cumulative(tau) / total, 0.0, 1.0);
  }
  cumulative_.front() = 0.0;
  cumulative_.back() = 1.0;
  for (std::size_t i = 1; i < table_size; ++i) {
    cumulative_[i] = std::max(cumulative_[i], cumulative_[i - 1]);
  }
}

double PairDelaySampler::sample(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t hi = static_cast<std::size_t>(it - cumulative_.begin());
  const std::size_t i = hi == 0 ? 0 : std::min(hi, cumulative_.size() - 1) - 1;
  const double c0 = cumulative_[i];
  const double c1 = cumulative_[i + 1];
  const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
  return delays_[i] + frac * (delays_[i + 1] - delays_[i]);
}

double PairDelaySampler::cdf(double tau) const {
  if (tau <= delays_.front()) return 0.0;
  if (tau >= delays_.back()) return 1.0;
  const double step = delays_[1] - delays_[0];
  const std::size_t i = std::min(static_cast<std::size_t>(tau / step), delays_.size() - 2);
  const double frac = (tau - delays_[i]) / step;
  return cumulative_[i] + frac * (cumulative_[i + 1] - cumulative_[i]);
}

double sample_pair_delay(const PairDelaySampler& sampler, Rng& rng) { return sampler.sample(rng); }

ChannelPair assign_channels(double theta, Rng& rng) {
  const int x = rng.uniform() < 0.5 ? 1 : -1;
  const double p_same = 0.5 * (1.0 + std::cos(theta));
  const int y = rng.uniform() < p_same ? x : -x;
  return ChannelPair(x, y);
}

double SimConfig::matched_pair_rate(const WavepacketModel& model) {
  // Per channel pair the true density is pair_rate * p(tau) * (1 + XY cos)/4,
  // which must equal (G0 - N0)(1 + XY cos)/2.
  return 2.0 * model.excess_area();
}

SimConfig SimConfig::matched(const WavepacketModel& model, const PhaseSetting& phases,
                             const ExperimentPlan& plan, std::uint64_t seed) {
  SimConfig cfg(model);
  cfg.phases = phases;
  cfg.plan = plan;
  cfg.seed = seed;
  cfg.pair_rate = model.amplitude() > 0.0 ? matched_pair_rate(model) : 0.0;
  cfg.singles_rates.fill(matched_singles_rate(model, plan, cfg.pair_rate));
  return cfg;
}

double SimConfig::matched_singles_rate(const WavepacketModel& model, const ExperimentPlan& plan,
                                       double pair_rate) {
  // Equal singles s on every channel solve s^2 + 2 q s + q^2/xi = N0 eta xi, with q
  // the time-averaged rate of pair photons reaching one detector.
  const double xi = plan.duty_cycle;
  const double q = 0.5 * pair_rate * xi * std::sqrt(plan.joint_efficiency);
  const double target = model.accidental_floor() * plan.joint_efficiency * xi;
  if (q * q / xi > target) {
    throw DomainError("pair rate alone exceeds the accidental floor; lower the floor scale");
  }
  return std::sqrt(q * q * (1.0 - 1.0 / xi) + target) - q;
}

double SimConfig::implied_accidental_density(Channel stokes, Channel anti_stokes) const {
  const double xi = plan.duty_cycle;
  const double q = 0.5 * pair_rate * xi * std::sqrt(plan.joint_efficiency);
  const double a = singles_rates[static_cast<std::size_t>(stokes)];
  const double b = singles_rates[static_cast<std::size_t>(anti_stokes)];
  return a * b + q * (a + b) + q * q / xi;
}

void SimConfig::validate() const {
  plan.validate();
  if (!(pair_rate >= 0.0) || !std::isfinite(pair_rate)) throw DomainError("pair rate must be >= 0");
  for (double r : singles_rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("singles rates must be >= 0");
  }
  if (!(window_period > 0.0) || !std::isfinite(window_period)) {
    throw DomainError("window period must be positive");
  }
  if (!(shard_length > 0.0) || !std::isfinite(shard_length)) {
    throw DomainError("shard length must be positive");
  }
  const double target = model.accidental_floor() * plan.joint_efficiency * plan.duty_cycle;
  for (Channel s : {Channel::StokesPlus, Channel::StokesMinus}) {
    for (Channel as : {Channel::AntiStokesPlus, Channel::AntiStokesMinus}) {
      const double implied = implied_accidental_density(s, as);
      if (std::abs(implied - target) > 0.01 * target) {
        throw DomainError("singles rates do not reproduce the accidental floor for pair " +
                          std::string(channel_name(s)) + "/" + std::string(channel_name(as)));
      }
    }
  }
  run_length_ticks();
  const std::uint64_t period = to_ticks(window_period, "window period");
  if (period == 0 || std::llround(plan.duty_cycle * static_cast<double>(period)) < 1) {
    throw DomainError("active window shorter than one tick");
  }
  if (to_ticks(shard_length, "shard length") == 0) throw DomainError("shard shorter than one tick");
}

std::uint64_t SimConfig::run_length_ticks() const {
  return to_ticks(plan.collection_time, "run length");
}

StreamHeader simulate_streaming(const SimConfig& config, const EventSink& sink, unsigned threads) {
  config.validate();
  ShardPlan plan{};
  plan.run_ticks = config.run_length_ticks();
  plan.shard_ticks = to_ticks(config.shard_length, "shard length");
  plan.period_ticks = to_ticks(config.window_period, "window period");
  plan.active_ticks = std::min<std::uint64_t>(
      plan.period_ticks,
      static_cast<std::uint64_t>(std::llround(config.plan.duty_cycle * static_cast<double>(plan.period_ticks))));
  plan.survival = std::sqrt(config.plan.joint_efficiency);

  std::optional<PairDelaySampler> sampler;
  if (config.pair_rate > 0.0) sampler.emplace(config.model);
  const PairDelaySampler* sampler_ptr = sampler ? &*sampler : nullptr;

  StreamHeader header;
  header.tick_ps = 1;
  header.run_length = plan.run_ticks;
  header.seed = config.seed;
  header.config_digest = config.config_digest;

  const std::uint64_t shards = (plan.run_ticks + plan.shard_ticks - 1) / plan.shard_ticks;
  const unsigned workers = std::max(1u, threads);
  std::vector<Key> pending;
  std::vector<Key> merged;
  std::vector<DetectionEvent> chunk;

  auto emit = [&](std::vector<Key> keys, std::uint64_t shard_end) {
    merged.clear();
    merged.reserve(pending.size() + keys.size());
    std::merge(pending.begin(), pending.end(), keys.begin(), keys.end(), std::back_inserter(merged));
    auto split = std::partition_point(merged.begin(), merged.end(),
                                      [&](Key k) { return key_ticks(k) < shard_end; });
    chunk.clear();
    chunk.reserve(static_cast<std::size_t>(split - merged.begin()));
    for (auto it = merged.begin(); it != split; ++it) chunk.push_back(key_event(*it));
    pending.assign(split, merged.end());
    if (!chunk.empty()) sink(chunk);
  };

  for (std::uint64_t first = 0; first < shards; first += workers) {
    const std::uint64_t last = std::min<std::uint64_t>(shards, first + workers);
    std::vector<std::vector<Key>> batch(last - first);
    if (workers == 1) {
      batch[0] = simulate_shard(config, sampler_ptr, plan, first);
    } else {
      std::vector<std::future<std::vector<Key>>> futures;
      for (std::uint64_t s = first; s < last; ++s) {
        futures.push_back(std::async(std::launch::async, simulate_shard, std::cref(config),
                                     sampler_ptr, std::cref(plan), s));
      }
      for (std::size_t i = 0; i < futures.size(); ++i) batch[i] = futures[i].get();
    }
    for (std::uint64_t s = first; s < last; ++s) {
      const std::uint64_t shard_end = std::min(plan.run_ticks, (s + 1) * plan.shard_ticks);
      emit(std::move(batch[s - first]), shard_end);
    }
  }
  emit({}, std::numeric_limits<std::uint64_t>::max() >> 2);
  return header;
}

TimeTagStream simulate_run(const SimConfig& config, unsigned threads) {
  TimeTagStream stream;
  stream.header = simulate_streaming(
      config,
      [&](std::span<const DetectionEvent> chunk) {
        stream.events.insert(stream.events.end(), chunk.begin(), chunk.end());
      },
      threads);
  return stream;
}

}  // namespace binbell
