#include "binbell/pipeline.hpp"

#include <cmath>

#include "binbell/rng.hpp"
#include "binbell/simulator.hpp"

namespace binbell {

std::uint64_t sub_run_seed(std::uint64_t seed, std::uint64_t k) {
  return splitmix64(splitmix64(seed) + 0x5bd1e995ull * (k + 1));
}

std::optional<ActiveGate> analysis_gate(const RunConfig& config) {
  if (!config.analysis.gate) return std::nullopt;
  return ActiveGate{config.window_period, config.duty_cycle};
}

CoincidenceHistogram simulate_histogram(const SimConfig& sim, const HistogramGeometry& geometry,
                                        const std::optional<ActiveGate>& gate, unsigned threads) {
  const TimeTagStream stream = simulate_run(sim, threads);
  return histogram_coincidences(stream, geometry, gate);
}

std::array<CoincidenceHistogram, 4> simulate_bell(const RunConfig& config, unsigned threads) {
  const HistogramGeometry geometry = config.analysis.geometry();
  const auto gate = analysis_gate(config);
  std::array<std::optional<CoincidenceHistogram>, 4> runs;
  for (std::size_t k = 0; k < 4; ++k) {
    SimConfig sim = config.sim_config(config.bell.setting(k));
    sim.seed = sub_run_seed(config.seed, k);
    runs[k] = simulate_histogram(sim, geometry, gate, threads);
  }
  return {std::move(*runs[0]), std::move(*runs[1]), std::move(*runs[2]), std::move(*runs[3])};
}

std::array<PairCounts, 4> expected_bell(const RunConfig& config) {
  const HistogramGeometry geometry = config.analysis.geometry();
  const WavepacketModel model = config.model();
  const ExperimentPlan plan = config.plan();
  std::array<PairCounts, 4> out;
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = PairCounts::expected(model, config.bell.setting(k), plan, geometry);
  }
  return out;
}

std::vector<SeriesPoint> FringeScan::series(std::size_t pair_index) const {
  std::vector<SeriesPoint> out;
  for (const auto& p : points) {
    const double c = p.counts.at(pair_index);
    out.push_back({p.phi_s, c, poisson_sigma(c)});
  }
  return out;
}

FringeScan simulate_fringe(const RunConfig& config, double phi_as, unsigned threads) {
  RunConfig cfg = config;
  cfg.collection_time = config.scan.collection_time;
  const double lo = config.scan.tau - 0.5 * config.scan.width;
  const HistogramGeometry geometry =
      HistogramGeometry::from_seconds(config.scan.width, lo, lo + config.scan.width);
  const auto gate = analysis_gate(config);
  const WavepacketModel model = cfg.model();
  ExperimentPlan plan = cfg.plan();
  plan.bin_width = geometry.bin_width();

  FringeScan scan;
  scan.base = PhaseSetting{0.0, phi_as};
  for (std::size_t k = 0; k < config.scan.points; ++k) {
    FringePoint point;
    point.phi_s = kTwoPi * static_cast<double>(k) / static_cast<double>(config.scan.points);
    const PhaseSetting phases{point.phi_s, phi_as};
    SimConfig sim = cfg.sim_config(phases);
    sim.seed = sub_run_seed(config.seed, k);
    const CoincidenceHistogram hist = simulate_histogram(sim, geometry, gate, threads);
    // Expectation averaged over the window with Simpson's rule.
    for (std::size_t p = 0; p < 4; ++p) {
      point.counts[p] = static_cast<double>(hist.counts[p][0]);
      const int n = 64;
      const double h = geometry.bin_width() / n;
      double sum = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * expected_coincidences(model, kAllPairs[p], phases, geometry.tau_min() + i * h, plan);
      }
      point.expected[p] = sum / (3.0 * n);
    }
    scan.points.push_back(point);
  }
  return scan;
}

}  // namespace binbell
