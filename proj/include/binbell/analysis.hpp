#pragma once

// Coincidence histogramming and Bell estimators.
//
// Delays are tau = t_as - t_s. Histogram bins are half-open intervals
// [tau_min + k*w, tau_min + (k+1)*w) laid out on the picosecond tick grid, so
// binning is exact integer arithmetic. Per-pair arrays are indexed by
// ChannelPair::index(): ++, +-, -+, --.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "binbell/model.hpp"
#include "binbell/timetag.hpp"

namespace binbell {

struct HistogramGeometry {
  std::int64_t tau_min_ticks = 0;
  std::int64_t bin_ticks = 1000;
  std::size_t bins = 0;

  /// bins = ceil((tau_max - tau_min)/bin_width); edges rounded to whole ticks.
  static HistogramGeometry from_seconds(double bin_width, double tau_min, double tau_max);

  double bin_width() const { return static_cast<double>(bin_ticks) * kTickSeconds; }
  double tau_min() const { return static_cast<double>(tau_min_ticks) * kTickSeconds; }
  double tau_max() const { return tau_min() + static_cast<double>(bins) * bin_width(); }
  std::int64_t tau_max_ticks() const {
    return tau_min_ticks + static_cast<std::int64_t>(bins) * bin_ticks;
  }
  double bin_lower(std::size_t i) const { return tau_min() + static_cast<double>(i) * bin_width(); }
  double bin_center(std::size_t i) const { return bin_lower(i) + 0.5 * bin_width(); }
  std::optional<std::size_t> bin_of_ticks(std::int64_t delay_ticks) const;
  std::optional<std::size_t> bin_of(double tau) const;

  friend bool operator==(const HistogramGeometry&, const HistogramGeometry&) = default;
};

/// Only Stokes tags inside the active part of each period are paired.
struct ActiveGate {
  double period = 10e-6;
  double duty_cycle = 1.0;
};

struct CoincidenceHistogram {
  explicit CoincidenceHistogram(const HistogramGeometry& g);

  HistogramGeometry geometry;
  std::array<std::vector<std::uint64_t>, 4> counts;
  std::array<std::uint64_t, kChannelCount> singles{};
  double live_time = 0.0;

  /// Element-wise sum; geometries must match.
  CoincidenceHistogram& merge(const CoincidenceHistogram& other);
  std::uint64_t total(std::size_t pair_index) const;

  friend bool operator==(const CoincidenceHistogram&, const CoincidenceHistogram&) = default;
};

/// Counts every (Stokes, anti-Stokes) pairing whose delay falls in the
/// geometry, using one forward sweep over the sorted stream.
CoincidenceHistogram histogram_coincidences(const TimeTagStream& stream,
                                            const HistogramGeometry& geometry,
                                            const std::optional<ActiveGate>& gate = std::nullopt);

/// Sum of the per-stream histograms.
CoincidenceHistogram histogram_streams(std::span<const TimeTagStream> streams,
                                       const HistogramGeometry& geometry,
                                       const std::optional<ActiveGate>& gate = std::nullopt);

/// Real-valued counts per channel pair; also used for noiseless expectations.
struct PairCounts {
  HistogramGeometry geometry;
  std::array<std::vector<double>, 4> counts;

  static PairCounts from_histogram(const CoincidenceHistogram& hist);
  /// expected_coincidences evaluated at each bin center.
  static PairCounts expected(const WavepacketModel& model, const PhaseSetting& phases,
                             const ExperimentPlan& plan, const HistogramGeometry& geometry);
};

/// sqrt(max(c, 1)): Poisson standard deviation with empty bins given unit error.
double poisson_sigma(double count);

struct Sideband {
  double lo = -400e-9;
  double hi = -20e-9;
  friend bool operator==(const Sideband&, const Sideband&) = default;
};

struct FloorEstimate {
  double mean = 0.0;   // counts per bin
  double sigma = 0.0;  // standard error of the mean
  std::size_t bins = 0;
};

/// Mean counts per bin over the bins whose centers lie in the sideband.
FloorEstimate estimate_floor(const PairCounts& counts, std::size_t pair_index, const Sideband& band);
/// Floor per channel pair averaged over all four pairs.
FloorEstimate estimate_common_floor(const PairCounts& counts, const Sideband& band);

struct Series {
  std::vector<double> tau;
  std::vector<double> value;
  std::vector<double> sigma;
};

struct NormalizedSeries : Series {
  FloorEstimate floor;
};

/// g_XY(tau) = C_XY / floor.
NormalizedSeries normalize_g2(const CoincidenceHistogram& hist, ChannelPair pair,
                              const Sideband& band = {});

/// g0(tau) estimated as (sum over pairs of C)/(2 floor) - 1.
NormalizedSeries envelope_g2(const CoincidenceHistogram& hist, const Sideband& band = {});

/// g_XY / g0 = C_XY / (sum C / 2 - floor), the beating normalized to its envelope
/// without subtracting accidentals.
NormalizedSeries normalized_beating(const CoincidenceHistogram& hist, ChannelPair pair,
                                    const Sideband& band = {});

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
};

/// (C++ + C-- - C+- - C-+)/(sum) with first-order Poisson errors. Order ++, +-, -+, --.
Estimate estimate_E_four(const std::array<double, 4>& counts);

/// (C_plus - C_perp)/(C_plus + C_perp) from the ++ counts at phi_s and phi_s + pi.
Estimate estimate_E_two(double c_plus, double c_perp);

struct BellEstimate {
  std::array<Estimate, 4> E{};
  double S = 0.0;
  double sigma_S = 0.0;
  double tau = 0.0;
  BellSettings settings;
  /// |S| exceeds 2 sqrt(2) by more than 3 sigma: check inputs.
  bool supra_quantum = false;
};

BellEstimate estimate_S(const std::array<Estimate, 4>& E, double tau = 0.0,
                        const BellSettings& settings = {});

struct BellScanPoint {
  double tau = 0.0;
  std::optional<BellEstimate> estimate;  // empty where a setting had no counts
};

/// S(tau) from four runs ordered as BellSettings::setting(k). With
/// window_bins > 1, consecutive bins are summed into non-overlapping windows.
std::vector<BellScanPoint> scan_S(const std::array<PairCounts, 4>& runs,
                                  const BellSettings& settings, std::size_t window_bins = 1);

}  // namespace binbell
