#pragma once

// Composite runs built from the simulator and analysis: the four Bell
// settings, phase-fringe scans and their noiseless expectations.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "binbell/analysis.hpp"
#include "binbell/config.hpp"
#include "binbell/fitting.hpp"

namespace binbell {

/// Seed of sub-run k (Bell setting or scan point) of a run seeded with `seed`.
std::uint64_t sub_run_seed(std::uint64_t seed, std::uint64_t k);

std::optional<ActiveGate> analysis_gate(const RunConfig& config);

CoincidenceHistogram simulate_histogram(const SimConfig& sim, const HistogramGeometry& geometry,
                                        const std::optional<ActiveGate>& gate = std::nullopt,
                                        unsigned threads = 1);

/// Four runs ordered as BellSettings::setting(k), seeded with sub_run_seed(seed, k).
std::array<CoincidenceHistogram, 4> simulate_bell(const RunConfig& config, unsigned threads = 1);
std::array<PairCounts, 4> expected_bell(const RunConfig& config);

struct FringePoint {
  double phi_s = 0.0;
  std::array<double, 4> counts{};    // per channel pair inside the scan window
  std::array<double, 4> expected{};  // model expectation of the same
};

struct FringeScan {
  PhaseSetting base;  // phi_as held fixed; phi_s from the grid
  std::vector<FringePoint> points;

  /// (phi_s, C, sigma) series of one channel pair for fit_phase_fringe.
  std::vector<SeriesPoint> series(std::size_t pair_index = 0) const;
};

/// phi_s on an even grid over [0, 2 pi) with phi_as fixed; each point is an
/// independent run of scan.collection_time counted in [tau - width/2, tau + width/2).
FringeScan simulate_fringe(const RunConfig& config, double phi_as, unsigned threads = 1);

}  // namespace binbell
