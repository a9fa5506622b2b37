#include "binbell/csv.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "binbell/errors.hpp"

namespace binbell {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& s, std::size_t line_no) {
  if (s == "nan" || s == "NaN" || s.empty()) return std::nan("");
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  }
}

std::vector<double> ns_axis(const HistogramGeometry& g) {
  std::vector<double> tau(g.bins);
  for (std::size_t i = 0; i < g.bins; ++i) tau[i] = g.bin_center(i) * 1e9;
  return tau;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string provenance_line(const Provenance& p) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "config_digest=%016" PRIx64 " seed=%" PRIu64, p.config_digest, p.seed);
  return buf;
}

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw DataError("CSV has no column '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& c : columns) {
    if (c == name) return true;
  }
  return false;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const std::size_t k = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      table.comments.push_back(trim(t.substr(1)));
      continue;
    }
    auto fields = split(t);
    if (table.columns.empty()) {
      table.columns = std::move(fields);
      continue;
    }
    if (fields.size() != table.columns.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.columns.size()) + " fields");
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_cell(f, line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw DataError("CSV has no header row");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_csv(in);
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (const auto& c : table.comments) out << "# " << c << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_csv(out, table);
  if (!out) throw DataError("failed writing " + path.string());
}

CsvTable histogram_table(const CoincidenceHistogram& hist, const Provenance& p) {
  CsvTable t;
  t.comments.push_back(provenance_line(p));
  t.columns = {"tau_ns", "c_pp", "c_pm", "c_mp", "c_mm"};
  const auto tau = ns_axis(hist.geometry);
  for (std::size_t i = 0; i < hist.geometry.bins; ++i) {
    t.rows.push_back({tau[i], static_cast<double>(hist.counts[0][i]),
                      static_cast<double>(hist.counts[1][i]), static_cast<double>(hist.counts[2][i]),
                      static_cast<double>(hist.counts[3][i])});
  }
  return t;
}

PairCounts pair_counts_from_table(const CsvTable& table) {
  const auto tau = table.column("tau_ns");
  if (tau.size() < 2) throw DataError("histogram CSV needs at least two rows");
  const double width_ns = tau[1] - tau[0];
  if (!(width_ns > 0.0)) throw DataError("histogram CSV bins must increase");
  for (std::size_t i = 2; i < tau.size(); ++i) {
    if (std::abs(tau[i] - tau[i - 1] - width_ns) > 1e-6 * width_ns + 1e-6) {
      throw DataError("histogram CSV bins are not evenly spaced");
    }
  }
  PairCounts out;
  out.geometry = HistogramGeometry::from_seconds(width_ns * 1e-9, (tau[0] - 0.5 * width_ns) * 1e-9,
                                                 (tau.back() + 0.5 * width_ns) * 1e-9);
  out.geometry.bins = tau.size();
  const char* names[4] = {"c_pp", "c_pm", "c_mp", "c_mm"};
  for (std::size_t p = 0; p < 4; ++p) out.counts[p] = table.column(names[p]);
  return out;
}

CsvTable g2_table(const CoincidenceHistogram& hist, const Sideband& band, const Provenance& p) {
  CsvTable t;
  t.comments.push_back(provenance_line(p));
  t.columns = {"tau_ns"};
  std::vector<NormalizedSeries> series;
  for (const auto& pair : kAllPairs) {
    series.push_back(normalize_g2(hist, pair, band));
    const std::string tag = pair.label() == "++"   ? "pp"
                            : pair.label() == "+-" ? "pm"
                            : pair.label() == "-+" ? "mp"
                                                   : "mm";
    t.columns.push_back("g_" + tag);
    t.columns.push_back("sg_" + tag);
  }
  series.push_back(envelope_g2(hist, band));
  t.columns.push_back("g0");
  t.columns.push_back("sg0");
  series.push_back(normalized_beating(hist, kAllPairs[0], band));
  t.columns.push_back("beat_pp");
  t.columns.push_back("sbeat_pp");
  const auto tau = ns_axis(hist.geometry);
  char buf[64];
  std::snprintf(buf, sizeof buf, "floor_pp=%.9g floor_common=%.9g", series[0].floor.mean,
                series[4].floor.mean);
  t.comments.emplace_back(buf);
  for (std::size_t i = 0; i < hist.geometry.bins; ++i) {
    std::vector<double> row{tau[i]};
    for (const auto& s : series) {
      row.push_back(s.value[i]);
      row.push_back(s.sigma[i]);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable bell_table(const std::vector<BellScanPoint>& scan, const Provenance& p) {
  CsvTable t;
  t.comments.push_back(provenance_line(p));
  t.columns = {"tau_ns", "E1", "sE1", "E2", "sE2", "E3", "sE3", "E4", "sE4", "S", "sS"};
  const double nan = std::nan("");
  for (const auto& pt : scan) {
    std::vector<double> row{pt.tau * 1e9};
    if (pt.estimate) {
      for (const auto& e : pt.estimate->E) {
        row.push_back(e.value);
        row.push_back(e.sigma);
      }
      row.push_back(pt.estimate->S);
      row.push_back(pt.estimate->sigma_S);
    } else {
      row.resize(11, nan);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace binbell
