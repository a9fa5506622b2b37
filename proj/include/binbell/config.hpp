#pragma once

// Run configuration files.
//
// Grammar (one statement per line, '#' starts a comment):
//
//   file    := { section | entry | blank }
//   section := '[' name ']'
//   entry   := key '=' value
//   value   := quantity | 'auto' | word
//   quantity:= number [unit]
//
// Physical quantities must carry a unit; the accepted units depend on the key:
//
//   time           ps ns us ms s
//   angle          rad deg pi            ("0.25 pi" is pi/4)
//   beat frequency Hz kHz MHz GHz rad/s  (Hz units are cycles per second and
//                                         are multiplied by 2 pi)
//   rate           /s Hz kHz MHz
//   rate density   /s2
//
// Dimensionless keys (efficiency, duty_cycle, counts, seed) take bare numbers.
// serialize() writes every value in canonical units with 17 significant
// digits, so parse(serialize(c)) == c.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "binbell/analysis.hpp"
#include "binbell/model.hpp"
#include "binbell/simulator.hpp"

namespace binbell {

enum class Dimension { Time, Angle, AngularFrequency, Rate, RateDensity, Number };

/// Parses "<number> <unit>" into canonical units (s, rad, rad/s, /s, /s2).
double parse_quantity(std::string_view text, Dimension dim);

struct AnalysisOptions {
  double bin_width = 1e-9;
  double tau_min = -400e-9;
  double tau_max = 900e-9;
  Sideband sideband;
  /// Only pair Stokes tags that fall inside the active windows.
  bool gate = false;
  /// Bins summed per point of the Bell scan.
  std::size_t bell_window_bins = 1;

  HistogramGeometry geometry() const {
    return HistogramGeometry::from_seconds(bin_width, tau_min, tau_max);
  }
  friend bool operator==(const AnalysisOptions&, const AnalysisOptions&) = default;
};

struct ScanOptions {
  double tau = 252e-9;     // center of the coincidence window
  double width = 10e-9;    // coincidence window width
  std::size_t points = 12;  // phi_s grid over [0, 2 pi)
  double collection_time = 73.0;
  friend bool operator==(const ScanOptions&, const ScanOptions&) = default;
};

struct OutputPaths {
  std::string tags = "run.bnb1";
  std::string histogram = "histogram.csv";
  std::string g2 = "g2.csv";
  std::string bell = "bell.csv";
  std::string fringe = "fringe.csv";
  friend bool operator==(const OutputPaths&, const OutputPaths&) = default;
};

struct RunConfig {
  double peak_rate_density = 0.0;
  double coherence_time = 0.0;
  double rise_time = 0.0;
  double accidental_floor = 0.0;
  double beat_frequency = 0.0;

  PhaseSetting phases;
  BellSettings bell;

  double joint_efficiency = 1.0;
  double duty_cycle = 1.0;
  double collection_time = 1.0;

  std::optional<double> pair_rate;                         // empty: matched to the model
  std::optional<std::array<double, kChannelCount>> singles;  // empty: matched to the floor
  double window_period = 10e-6;
  double shard_length = 1.0;
  std::uint64_t seed = 1;

  AnalysisOptions analysis;
  ScanOptions scan;
  OutputPaths output;

  /// Calibrated reference parameter set (the "reference" preset).
  static RunConfig reference();

  WavepacketModel model() const;
  ExperimentPlan plan() const;
  /// Simulation of one phase setting with this config's rates and seed.
  SimConfig sim_config(const PhaseSetting& phases) const;
  SimConfig sim_config() const { return sim_config(phases); }
  /// FNV-1a 64 of the canonical text without seed and output paths.
  std::uint64_t digest() const;

  friend bool operator==(const RunConfig&, const RunConfig&);
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config, bool include_run_fields = true);

}  // namespace binbell
