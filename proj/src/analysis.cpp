#include "binbell/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "binbell/errors.hpp"

namespace binbell {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::int64_t seconds_to_ticks(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds / kTickSeconds));
}

struct Tag {
  std::int64_t t;
  int sign;
};

}  // namespace

HistogramGeometry HistogramGeometry::from_seconds(double bin_width, double tau_min,
                                                  double tau_max) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw DomainError("bin width must be positive");
  }
  if (!std::isfinite(tau_min) || !std::isfinite(tau_max) || !(tau_max > tau_min)) {
    throw DomainError("tau range must satisfy tau_min < tau_max");
  }
  HistogramGeometry g;
  g.bin_ticks = seconds_to_ticks(bin_width);
  if (g.bin_ticks < 1) throw DomainError("bin width below one tick");
  g.tau_min_ticks = seconds_to_ticks(tau_min);
  const std::int64_t span = seconds_to_ticks(tau_max) - g.tau_min_ticks;
  g.bins = static_cast<std::size_t>((span + g.bin_ticks - 1) / g.bin_ticks);
  return g;
}

std::optional<std::size_t> HistogramGeometry::bin_of_ticks(std::int64_t delay_ticks) const {
  if (delay_ticks < tau_min_ticks || delay_ticks >= tau_max_ticks()) return std::nullopt;
  return static_cast<std::size_t>((delay_ticks - tau_min_ticks) / bin_ticks);
}

std::optional<std::size_t> HistogramGeometry::bin_of(double tau) const {
  // Delays are resolved to the tick grid first, as the histogrammer sees them.
  if (!std::isfinite(tau)) return std::nullopt;
  return bin_of_ticks(std::llround(tau / kTickSeconds));
}

CoincidenceHistogram::CoincidenceHistogram(const HistogramGeometry& g) : geometry(g) {
  for (auto& c : counts) c.assign(g.bins, 0);
}

CoincidenceHistogram& CoincidenceHistogram::merge(const CoincidenceHistogram& other) {
  if (!(geometry == other.geometry)) throw DataError("cannot merge histograms with different geometry");
  for (std::size_t p = 0; p < 4; ++p) {
    for (std::size_t i = 0; i < geometry.bins; ++i) counts[p][i] += other.counts[p][i];
  }
  for (std::size_t c = 0; c < kChannelCount; ++c) singles[c] += other.singles[c];
  live_time += other.live_time;
  return *this;
}

std::uint64_t CoincidenceHistogram::total(std::size_t pair_index) const {
  std::uint64_t sum = 0;
  for (auto c : counts.at(pair_index)) sum += c;
  return sum;
}

CoincidenceHistogram histogram_coincidences(const TimeTagStream& stream,
                                            const HistogramGeometry& geometry,
                                            const std::optional<ActiveGate>& gate) {
  CoincidenceHistogram hist(geometry);
  const auto scale = static_cast<std::int64_t>(stream.header.tick_ps);

  std::vector<Tag> stokes;
  std::vector<Tag> anti;
  const DetectionEvent* prev = nullptr;
  for (const auto& e : stream.events) {
    if (prev != nullptr && e < *prev) throw DataError("time-tag stream is not sorted");
    prev = &e;
    ++hist.singles[static_cast<std::size_t>(e.channel)];
    const Tag tag{static_cast<std::int64_t>(e.timestamp) * scale, channel_sign(e.channel)};
    (is_stokes(e.channel) ? stokes : anti).push_back(tag);
  }

  std::int64_t period = 0;
  std::int64_t active = 0;
  hist.live_time = stream.run_seconds();
  if (gate) {
    period = seconds_to_ticks(gate->period);
    active = seconds_to_ticks(gate->period * gate->duty_cycle);
    if (period < 1 || active < 1) throw DomainError("gate shorter than one tick");
    hist.live_time *= gate->duty_cycle;
  }

  const std::int64_t lo_off = geometry.tau_min_ticks;
  const std::int64_t hi_off = geometry.tau_max_ticks();
  std::size_t first = 0;
  for (const auto& s : stokes) {
    if (gate && (s.t % period) >= active) continue;
    const std::int64_t lo = s.t + lo_off;
    const std::int64_t hi = s.t + hi_off;
    while (first < anti.size() && anti[first].t < lo) ++first;
    const std::size_t pair_base = s.sign > 0 ? 0 : 2;
    for (std::size_t k = first; k < anti.size() && anti[k].t < hi; ++k) {
      const auto bin = static_cast<std::size_t>((anti[k].t - lo) / geometry.bin_ticks);
      ++hist.counts[pair_base + (anti[k].sign > 0 ? 0 : 1)][bin];
    }
  }
  return hist;
}

CoincidenceHistogram histogram_streams(std::span<const TimeTagStream> streams,
                                       const HistogramGeometry& geometry,
                                       const std::optional<ActiveGate>& gate) {
  CoincidenceHistogram total(geometry);
  for (const auto& s : streams) total.merge(histogram_coincidences(s, geometry, gate));
  return total;
}

PairCounts PairCounts::from_histogram(const CoincidenceHistogram& hist) {
  PairCounts out;
  out.geometry = hist.geometry;
  for (std::size_t p = 0; p < 4; ++p) {
    out.counts[p].assign(hist.counts[p].begin(), hist.counts[p].end());
  }
  return out;
}

PairCounts PairCounts::expected(const WavepacketModel& model, const PhaseSetting& phases,
                                const ExperimentPlan& plan, const HistogramGeometry& geometry) {
  PairCounts out;
  out.geometry = geometry;
  for (std::size_t p = 0; p < 4; ++p) {
    out.counts[p].resize(geometry.bins);
    for (std::size_t i = 0; i < geometry.bins; ++i) {
      out.counts[p][i] =
          expected_coincidences(model, kAllPairs[p], phases, geometry.bin_center(i), plan);
    }
  }
  return out;
}

double poisson_sigma(double count) { return std::sqrt(std::max(count, 1.0)); }

FloorEstimate estimate_floor(const PairCounts& counts, std::size_t pair_index,
                             const Sideband& band) {
  FloorEstimate est;
  double sum = 0.0;
  for (std::size_t i = 0; i < counts.geometry.bins; ++i) {
    const double tau = counts.geometry.bin_center(i);
    if (tau >= band.lo && tau <= band.hi) {
      sum += counts.counts.at(pair_index)[i];
      ++est.bins;
    }
  }
  if (est.bins == 0) throw DataError("cannot estimate floor: sideband has no bins");
  if (!(sum > 0.0)) throw DataError("cannot estimate floor: sideband is empty");
  est.mean = sum / static_cast<double>(est.bins);
  est.sigma = std::sqrt(sum) / static_cast<double>(est.bins);
  return est;
}

FloorEstimate estimate_common_floor(const PairCounts& counts, const Sideband& band) {
  PairCounts summed;
  summed.geometry = counts.geometry;
  summed.counts[0].assign(counts.geometry.bins, 0.0);
  for (std::size_t p = 0; p < 4; ++p) {
    for (std::size_t i = 0; i < counts.geometry.bins; ++i) summed.counts[0][i] += counts.counts[p][i];
  }
  FloorEstimate est = estimate_floor(summed, 0, band);
  est.mean /= 4.0;
  est.sigma /= 4.0;
  return est;
}

NormalizedSeries normalize_g2(const CoincidenceHistogram& hist, ChannelPair pair,
                              const Sideband& band) {
  const PairCounts counts = PairCounts::from_histogram(hist);
  NormalizedSeries out;
  out.floor = estimate_floor(counts, pair.index(), band);
  const auto& c = counts.counts[pair.index()];
  for (std::size_t i = 0; i < hist.geometry.bins; ++i) {
    out.tau.push_back(hist.geometry.bin_center(i));
    out.value.push_back(c[i] / out.floor.mean);
    out.sigma.push_back(poisson_sigma(c[i]) / out.floor.mean);
  }
  return out;
}

NormalizedSeries envelope_g2(const CoincidenceHistogram& hist, const Sideband& band) {
  const PairCounts counts = PairCounts::from_histogram(hist);
  NormalizedSeries out;
  out.floor = estimate_common_floor(counts, band);
  const double f = out.floor.mean;
  const double sf = out.floor.sigma;
  for (std::size_t i = 0; i < hist.geometry.bins; ++i) {
    double s = 0.0;
    for (std::size_t p = 0; p < 4; ++p) s += counts.counts[p][i];
    out.tau.push_back(hist.geometry.bin_center(i));
    out.value.push_back(s / (2.0 * f) - 1.0);
    const double var_s = poisson_sigma(s) * poisson_sigma(s);
    out.sigma.push_back(std::sqrt(var_s / (4.0 * f * f) + s * s * sf * sf / (4.0 * f * f * f * f)));
  }
  return out;
}

NormalizedSeries normalized_beating(const CoincidenceHistogram& hist, ChannelPair pair,
                                    const Sideband& band) {
  const PairCounts counts = PairCounts::from_histogram(hist);
  NormalizedSeries out;
  out.floor = estimate_common_floor(counts, band);
  const double f = out.floor.mean;
  const double sf = out.floor.sigma;
  const std::size_t target = pair.index();
  for (std::size_t i = 0; i < hist.geometry.bins; ++i) {
    const double c = counts.counts[target][i];
    double o = 0.0;
    for (std::size_t p = 0; p < 4; ++p) {
      if (p != target) o += counts.counts[p][i];
    }
    const double d = 0.5 * (c + o) - f;
    out.tau.push_back(hist.geometry.bin_center(i));
    if (!(d > 0.0)) {
      out.value.push_back(kNaN);
      out.sigma.push_back(kNaN);
      continue;
    }
    const double dc = 1.0 / d - c / (2.0 * d * d);
    const double dother = -c / (2.0 * d * d);
    const double dfloor = c / (d * d);
    const double vc = poisson_sigma(c) * poisson_sigma(c);
    const double vo = poisson_sigma(o) * poisson_sigma(o);
    out.value.push_back(c / d);
    out.sigma.push_back(std::sqrt(dc * dc * vc + dother * dother * vo + dfloor * dfloor * sf * sf));
  }
  return out;
}

namespace {

Estimate contrast(double plus, double minus) {
  if (!(plus >= 0.0) || !(minus >= 0.0)) throw DataError("counts must be non-negative");
  const double total = plus + minus;
  if (!(total > 0.0)) throw DataError("empty bin");
  return {(plus - minus) / total, 2.0 * std::sqrt(plus * minus / (total * total * total))};
}

}  // namespace

Estimate estimate_E_four(const std::array<double, 4>& c) {
  for (double v : c) {
    if (!(v >= 0.0)) throw DataError("counts must be non-negative");
  }
  return contrast(c[0] + c[3], c[1] + c[2]);
}

Estimate estimate_E_two(double c_plus, double c_perp) { return contrast(c_plus, c_perp); }

BellEstimate estimate_S(const std::array<Estimate, 4>& E, double tau,
                        const BellSettings& settings) {
  BellEstimate out;
  out.E = E;
  out.tau = tau;
  out.settings = settings;
  double var = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    out.S += BellSettings::kSigns[k] * E[k].value;
    var += E[k].sigma * E[k].sigma;
  }
  out.sigma_S = std::sqrt(var);
  out.supra_quantum = std::abs(out.S) - 3.0 * out.sigma_S > kTsirelson + 1e-12;
  return out;
}

std::vector<BellScanPoint> scan_S(const std::array<PairCounts, 4>& runs,
                                  const BellSettings& settings, std::size_t window_bins) {
  if (window_bins == 0) throw DomainError("window must span at least one bin");
  const HistogramGeometry& g = runs[0].geometry;
  for (const auto& r : runs) {
    if (!(r.geometry == g)) throw DataError("Bell runs have mismatched geometries");
  }
  std::vector<BellScanPoint> out;
  for (std::size_t first = 0; first + window_bins <= g.bins; first += window_bins) {
    BellScanPoint point;
    point.tau = g.bin_lower(first) + 0.5 * static_cast<double>(window_bins) * g.bin_width();
    std::array<Estimate, 4> E{};
    bool complete = true;
    for (std::size_t k = 0; k < 4 && complete; ++k) {
      std::array<double, 4> c{};
      for (std::size_t p = 0; p < 4; ++p) {
        for (std::size_t i = first; i < first + window_bins; ++i) c[p] += runs[k].counts[p][i];
      }
      try {
        E[k] = estimate_E_four(c);
      } catch (const DataError&) {
        complete = false;
      }
    }
    if (complete) point.estimate = estimate_S(E, point.tau, settings);
    out.push_back(point);
  }
  return out;
}

}  // namespace binbell
