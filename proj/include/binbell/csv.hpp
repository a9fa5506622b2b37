#pragma once

// Plain CSV artifacts. Every file starts with a "# config_digest=<hex> seed=<n>"
// comment line, followed by a header row and numeric rows written with nine
// significant digits. Missing values are written as "nan".

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "binbell/analysis.hpp"

namespace binbell {

struct Provenance {
  std::uint64_t config_digest = 0;
  std::uint64_t seed = 0;
};

std::string format_number(double value);
std::string provenance_line(const Provenance& p);

struct CsvTable {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws DataError if absent.
  std::size_t column_index(const std::string& name) const;
  bool has_column(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const CsvTable& table);

/// tau_ns, c_pp, c_pm, c_mp, c_mm at bin centers.
CsvTable histogram_table(const CoincidenceHistogram& hist, const Provenance& p);
/// Rebuilds counts from a histogram table. Bin centers must be evenly spaced.
PairCounts pair_counts_from_table(const CsvTable& table);

/// tau_ns, g and sigma per pair, g0 envelope, and the normalized ++ beating.
CsvTable g2_table(const CoincidenceHistogram& hist, const Sideband& band, const Provenance& p);

/// tau_ns, E1, sE1, ..., E4, sE4, S, sS; gaps written as nan.
CsvTable bell_table(const std::vector<BellScanPoint>& scan, const Provenance& p);

void save_csv(const std::filesystem::path& path, const CsvTable& table);

}  // namespace binbell
