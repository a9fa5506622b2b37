#include "binbell/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "binbell/bnb1.hpp"
#include "binbell/calibration.hpp"
#include "binbell/config.hpp"
#include "binbell/csv.hpp"
#include "binbell/errors.hpp"
#include "binbell/fitting.hpp"
#include "binbell/pipeline.hpp"
#include "binbell/simulator.hpp"

namespace binbell {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<double> bin_ns;
  std::optional<double> tau_min_ns;
  std::optional<double> tau_max_ns;
  std::string window;
  std::string out;
  unsigned threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Run configuration file");
  cmd->add_option("--preset", c.preset, "Built-in parameter set: reference (alias paper)");
  cmd->add_option("--seed", c.seed, "Override the run seed");
  cmd->add_option("--bin-ns", c.bin_ns, "Histogram bin width, ns");
  cmd->add_option("--tau-min-ns", c.tau_min_ns, "Lower edge of the delay range, ns");
  cmd->add_option("--tau-max-ns", c.tau_max_ns, "Upper edge of the delay range, ns");
  cmd->add_option("--window", c.window, "Window in ns: lo:hi for fits, a width for Bell scans");
  cmd->add_option("--out", c.out, "Output file or directory");
  cmd->add_option("--threads", c.threads, "Worker threads for simulation")->check(CLI::PositiveNumber);
}

RunConfig resolve_config(const Common& c, bool required) {
  RunConfig cfg;
  if (!c.config_path.empty()) {
    if (!c.preset.empty()) throw ConfigError("--config and --preset are mutually exclusive");
    cfg = load_config(c.config_path);
  } else if (c.preset == "reference" || c.preset == "paper") {
    cfg = RunConfig::reference();
  } else if (!c.preset.empty()) {
    throw ConfigError("unknown preset '" + c.preset + "' (available: reference)");
  } else if (required) {
    throw ConfigError("no configuration: pass --config FILE or --preset reference");
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.bin_ns) cfg.analysis.bin_width = *c.bin_ns * 1e-9;
  if (c.tau_min_ns) cfg.analysis.tau_min = *c.tau_min_ns * 1e-9;
  if (c.tau_max_ns) cfg.analysis.tau_max = *c.tau_max_ns * 1e-9;
  try {
    (void)cfg.analysis.geometry();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

bool has_config(const Common& c) { return !c.config_path.empty() || !c.preset.empty(); }

double parse_ns(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid --window value '" + s + "'");
  }
}

/// "lo:hi" in ns.
FitWindow parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("--window expects lo:hi in ns");
  return {parse_ns(text.substr(0, colon)) * 1e-9, parse_ns(text.substr(colon + 1)) * 1e-9};
}

fs::path output_path(const Common& c, const std::string& name) {
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(dir);
  return dir / name;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Common& c, std::optional<int> setting, std::ostream& out) {
  const RunConfig cfg = resolve_config(c, true);
  PhaseSetting phases = cfg.phases;
  std::uint64_t seed = cfg.seed;
  if (setting) {
    if (*setting < 1 || *setting > 4) throw ConfigError("--setting must be 1..4");
    phases = cfg.bell.setting(static_cast<std::size_t>(*setting - 1));
    seed = sub_run_seed(cfg.seed, static_cast<std::uint64_t>(*setting - 1));
  }
  SimConfig sim = [&] {
    try {
      return cfg.sim_config(phases);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }();
  sim.seed = seed;
  try {
    sim.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  const fs::path path = c.out.empty() ? fs::path(cfg.output.tags) : fs::path(c.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open " + path.string() + " for writing");
  StreamHeader header;
  header.tick_ps = 1;
  header.run_length = sim.run_length_ticks();
  header.seed = sim.seed;
  header.config_digest = sim.config_digest;
  Bnb1Writer writer(file, header);
  std::array<std::uint64_t, kChannelCount> totals{};
  simulate_streaming(
      sim,
      [&](std::span<const DetectionEvent> chunk) {
        for (const auto& e : chunk) ++totals[static_cast<std::size_t>(e.channel)];
        writer.write(chunk);
      },
      c.threads);
  file.flush();
  if (!file) throw DataError("failed writing " + path.string());

  out << "wrote " << writer.records_written() << " events to " << path.string() << '\n';
  out << "config_digest " << hex(header.config_digest) << "  seed " << header.seed << '\n';
  out << "phi_s " << fmt("%.6g", phases.phi_s) << " rad  phi_as " << fmt("%.6g", phases.phi_as)
      << " rad  run " << fmt("%.6g", sim.plan.collection_time) << " s\n";
  for (std::size_t ch = 0; ch < kChannelCount; ++ch) {
    out << "  " << channel_name(static_cast<Channel>(ch)) << ": " << totals[ch] << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- analyze

int cmd_analyze(const Common& c, const std::vector<std::string>& files, std::ostream& out,
                std::ostream& err) {
  const RunConfig cfg = resolve_config(c, false);
  const HistogramGeometry geometry = cfg.analysis.geometry();
  const auto gate = analysis_gate(cfg);
  std::optional<CoincidenceHistogram> total;
  Provenance prov;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const TimeTagStream stream = load_bnb1(files[i]);
    if (i == 0) {
      prov = {stream.header.config_digest, stream.header.seed};
    } else if (stream.header.config_digest != prov.config_digest) {
      err << "note: " << files[i] << " has a different config digest\n";
    }
    CoincidenceHistogram h = histogram_coincidences(stream, geometry, gate);
    if (total) {
      total->merge(h);
    } else {
      total = std::move(h);
    }
  }
  const fs::path hist_path = output_path(c, cfg.output.histogram);
  save_csv(hist_path, histogram_table(*total, prov));
  out << "histogram: " << hist_path.string() << " (" << geometry.bins << " bins of "
      << fmt("%.6g", geometry.bin_width() * 1e9) << " ns)\n";
  out << "coincidences ++ " << total->total(0) << "  +- " << total->total(1) << "  -+ "
      << total->total(2) << "  -- " << total->total(3) << '\n';
  try {
    const CsvTable g2 = g2_table(*total, cfg.analysis.sideband, prov);
    const fs::path g2_path = output_path(c, cfg.output.g2);
    save_csv(g2_path, g2);
    out << "g2: " << g2_path.string() << '\n';
  } catch (const DataError& e) {
    err << "g2 not written: " << e.what() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- bell

int cmd_bell(const Common& c, const std::vector<std::string>& files, bool expected,
             std::optional<double> tau_ns, std::ostream& out) {
  if (!files.empty() && files.size() != 4) {
    throw ConfigError("bell needs exactly four time-tag files, one per setting");
  }
  const bool need_config = files.empty();
  const RunConfig cfg = resolve_config(c, need_config);
  std::size_t window_bins = cfg.analysis.bell_window_bins;
  if (!c.window.empty()) {
    const double w = parse_ns(c.window) * 1e-9;
    window_bins = static_cast<std::size_t>(std::llround(w / cfg.analysis.bin_width));
    if (window_bins == 0) throw ConfigError("--window is narrower than one bin");
  }

  std::array<PairCounts, 4> runs;
  Provenance prov{cfg.digest(), cfg.seed};
  if (!files.empty()) {
    if (expected) throw ConfigError("--expected cannot be combined with time-tag files");
    const HistogramGeometry geometry = cfg.analysis.geometry();
    const auto gate = analysis_gate(cfg);
    for (std::size_t k = 0; k < 4; ++k) {
      const TimeTagStream stream = load_bnb1(files[k]);
      if (k == 0) prov = {stream.header.config_digest, stream.header.seed};
      runs[k] = PairCounts::from_histogram(histogram_coincidences(stream, geometry, gate));
    }
  } else if (expected) {
    runs = expected_bell(cfg);
  } else {
    try {
      const auto hists = simulate_bell(cfg, c.threads);
      for (std::size_t k = 0; k < 4; ++k) runs[k] = PairCounts::from_histogram(hists[k]);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }

  const auto scan = scan_S(runs, cfg.bell, window_bins);
  const fs::path path = output_path(c, cfg.output.bell);
  save_csv(path, bell_table(scan, prov));
  out << "bell scan: " << path.string() << " (" << scan.size() << " points)\n";

  const BellScanPoint* best = nullptr;
  std::size_t flagged = 0;
  for (const auto& p : scan) {
    if (!p.estimate) continue;
    if (p.estimate->supra_quantum) ++flagged;
    // Bins where some setting saw only one outcome carry no error estimate.
    const bool resolved = std::all_of(p.estimate->E.begin(), p.estimate->E.end(),
                                      [](const Estimate& e) { return e.sigma > 0.0; });
    if (!expected && !resolved) continue;
    if (!best || std::abs(p.estimate->S) > std::abs(best->estimate->S)) best = &p;
  }
  auto describe = [&](const BellEstimate& e) {
    out << "S = " << fmt("%.4f", e.S) << " +- " << fmt("%.4f", e.sigma_S) << " at tau = "
        << fmt("%.6g", e.tau * 1e9) << " ns\n";
  };
  if (!best) {
    out << "no bin has resolved counts in all four settings\n";
    return kExitOk;
  }
  out << "max |S|: ";
  describe(*best->estimate);
  const BellEstimate& b = *best->estimate;
  const double excess = std::abs(b.S) - 2.0;
  if (b.sigma_S > 0.0) {
    const double n = excess / b.sigma_S;
    out << "verdict: " << (n >= 3.0 ? "CHSH bound violated" : "no significant violation") << " ("
        << fmt("%.2f", n) << " sigma beyond |S| = 2)\n";
  } else {
    out << "verdict: " << (excess > 0.0 ? "CHSH bound violated" : "no violation") << " (noiseless)\n";
  }
  if (tau_ns) {
    const double tau = *tau_ns * 1e-9;
    const auto bin = runs[0].geometry.bin_of_ticks(std::llround(tau / kTickSeconds));
    const std::size_t point = bin ? *bin / window_bins : scan.size();
    if (point < scan.size() && scan[point].estimate) {
      out << "at requested delay: ";
      describe(*scan[point].estimate);
    } else {
      out << "at requested delay: no counts\n";
    }
    if (has_config(c)) {
      out << "model S = " << fmt("%.4f", bell_S_analytic(cfg.model(), cfg.bell, tau)) << '\n';
    }
  }
  if (flagged > 0) {
    out << "warning: " << flagged << " bins exceed 2 sqrt(2) by more than 3 sigma; supra-quantum, check inputs\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- fit

void print_fit(std::ostream& out, const std::string& label, const FitResult& r, bool beating) {
  out << "[" << label << "]\n";
  if (beating) {
    out << "window_ns = " << fmt("%.6g", r.window.lo * 1e9) << " " << fmt("%.6g", r.window.hi * 1e9) << '\n';
  }
  out << "points = " << r.points << '\n';
  out << "offset = " << fmt("%.9g", r.offset) << " +- " << fmt("%.3g", r.sigma_offset()) << '\n';
  out << "visibility = " << fmt("%.6f", r.visibility) << " +- " << fmt("%.6f", r.sigma_visibility()) << '\n';
  out << "phase_rad = " << fmt("%.6f", r.phase) << " +- " << fmt("%.6f", r.sigma_phase()) << '\n';
  out << "reduced_chi2 = " << fmt("%.4f", r.reduced_chi2) << '\n';
  if (r.supra_physical) out << "warning = visibility exceeds 1 by more than 3 sigma\n";
  if (beating) {
    out << "abs_S = " << fmt("%.4f", kTsirelson * r.visibility) << " +- "
        << fmt("%.4f", kTsirelson * r.sigma_visibility()) << '\n';
  }
}

std::vector<SeriesPoint> load_series(const std::string& file, const std::string& xcol,
                                     double xscale, const std::string& ycol) {
  const CsvTable t = read_csv(fs::path(file));
  const auto x = t.column(xcol);
  const auto y = t.column(ycol);
  const std::string scol = "s" + ycol;
  const bool has_sigma = t.has_column(scol);
  const auto s = has_sigma ? t.column(scol) : std::vector<double>{};
  std::vector<SeriesPoint> pts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    pts.push_back({x[i] * xscale, y[i], has_sigma ? s[i] : poisson_sigma(y[i])});
  }
  return pts;
}

int cmd_fit(const Common& c, const std::vector<std::string>& files, const std::string& mode,
            std::string column, bool unweighted, std::optional<double> beat_mhz, std::ostream& out) {
  if (files.empty() || files.size() > 2) throw ConfigError("fit takes one or two CSV files");
  FitOptions opts;
  opts.weighted = !unweighted;
  std::ostringstream report;
  for (const auto& f : files) {
    for (const auto& line : read_csv(fs::path(f)).comments) report << "# " << line << '\n';
  }
  if (mode == "beating") {
    if (files.size() != 1) throw ConfigError("beating mode takes one CSV file");
    if (column.empty()) column = "beat_pp";
    double delta = kTwoPi * 10e6;
    if (beat_mhz) {
      delta = kTwoPi * *beat_mhz * 1e6;
    } else if (has_config(c)) {
      delta = resolve_config(c, true).beat_frequency;
    }
    const FitWindow window = parse_range(c.window.empty() ? std::string("150:350") : c.window);
    const auto pts = load_series(files[0], "tau_ns", 1e-9, column);
    const FitResult r = fit_beating(pts, delta, window, opts);
    report << "mode = beating\ncolumn = " << column << '\n'
           << "beat_frequency_mhz = " << fmt("%.6g", delta / kTwoPi / 1e6) << '\n';
    print_fit(report, files[0], r, true);
  } else if (mode == "fringe") {
    if (column.empty()) column = "c_pp";
    report << "mode = fringe\ncolumn = " << column << '\n';
    std::vector<FitResult> fits;
    for (const auto& f : files) {
      fits.push_back(fit_phase_fringe(load_series(f, "phi_s", 1.0, column), opts));
      print_fit(report, f, fits.back(), false);
    }
    if (fits.size() == 2) {
      const VisibilityS s = S_from_visibilities(fits[0].visibility, fits[1].visibility,
                                                fits[0].sigma_visibility(), fits[1].sigma_visibility());
      report << "[S_from_visibilities]\n"
             << "S = " << fmt("%.4f", s.S) << '\n'
             << "sigma_quadrature = " << fmt("%.4f", s.sigma) << '\n'
             << "sigma_linear = " << fmt("%.4f", s.sigma_linear) << '\n';
    }
  } else {
    throw ConfigError("unknown fit mode '" + mode + "' (beating or fringe)");
  }
  out << report.str();
  if (!c.out.empty()) {
    const fs::path path(c.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw DataError("cannot open " + path.string() + " for writing");
    f << report.str();
  }
  return kExitOk;
}

// ---------------------------------------------------------------- scan-phase

int cmd_scan_phase(const Common& c, const std::string& phi_as_text, std::optional<std::size_t> points,
                   std::optional<double> tau_ns, std::ostream& out) {
  RunConfig cfg = resolve_config(c, true);
  double phi_as = cfg.phases.phi_as;
  if (!phi_as_text.empty()) phi_as = parse_quantity(phi_as_text, Dimension::Angle);
  if (points) cfg.scan.points = *points;
  if (tau_ns) cfg.scan.tau = *tau_ns * 1e-9;
  if (!c.window.empty()) cfg.scan.width = parse_ns(c.window) * 1e-9;
  FringeScan scan;
  try {
    scan = simulate_fringe(cfg, phi_as, c.threads);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  CsvTable t;
  t.comments.push_back(provenance_line({cfg.digest(), cfg.seed}));
  t.comments.push_back("tau_ns=" + fmt("%.9g", cfg.scan.tau * 1e9) + " width_ns=" +
                       fmt("%.9g", cfg.scan.width * 1e9) + " phi_as=" + fmt("%.9g", phi_as));
  t.columns = {"phi_s", "c_pp", "sc_pp", "c_pm", "sc_pm", "c_mp", "sc_mp", "c_mm", "sc_mm", "expected_pp"};
  for (const auto& p : scan.points) {
    std::vector<double> row{p.phi_s};
    for (double v : p.counts) {
      row.push_back(v);
      row.push_back(poisson_sigma(v));
    }
    row.push_back(p.expected[0]);
    t.rows.push_back(std::move(row));
  }
  const fs::path path = output_path(c, cfg.output.fringe);
  save_csv(path, t);
  out << "fringe scan: " << path.string() << " (" << scan.points.size() << " phases, phi_as = "
      << fmt("%.6g", phi_as) << " rad, tau = " << fmt("%.6g", cfg.scan.tau * 1e9) << " ns)\n";
  const auto series = scan.series(0);
  const FitResult r = fit_phase_fringe(series);
  out << "fringe visibility = " << fmt("%.4f", r.visibility) << " +- " << fmt("%.4f", r.sigma_visibility())
      << "  (model " << fmt("%.4f", visibility_at(cfg.model(), cfg.scan.tau)) << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- report

int cmd_report(const Common& c, const std::vector<std::string>& files, std::ostream& out) {
  const RunConfig cfg = resolve_config(c, true);
  const WavepacketModel model = cfg.model();
  out << "config_digest = " << hex(cfg.digest()) << "\nseed = " << cfg.seed << '\n';
  out << "[model]\n";
  out << "coherence_time_ns = " << fmt("%.6g", model.coherence_time() * 1e9) << '\n';
  out << "rise_time_ns = " << fmt("%.6g", model.rise_time() * 1e9) << '\n';
  out << "beat_frequency_mhz = " << fmt("%.6g", model.beat_frequency() / kTwoPi / 1e6) << '\n';
  if (model.accidental_floor() > 0.0) {
    out << "peak_g2 = " << fmt("%.6g", g2_envelope(model, model.shape().peak_time())) << '\n';
  }
  for (double tau : {52e-9, 252e-9}) {
    out << "V(" << fmt("%.0f", tau * 1e9) << " ns) = " << fmt("%.4f", visibility_at(model, tau)) << '\n';
  }
  if (const auto iv = visibility_above(model, 1.0 / kSqrt2)) {
    out << "violation_window_ns = " << fmt("%.2f", iv->lower * 1e9) << " " << fmt("%.2f", iv->upper * 1e9) << '\n';
  } else {
    out << "violation_window_ns = none\n";
  }
  out << "S_model(52 ns) = " << fmt("%.4f", bell_S_analytic(model, cfg.bell, 52e-9)) << '\n';

  try {
    const SimConfig sim = cfg.sim_config();
    out << "[source]\n";
    out << "pair_rate_per_s = " << fmt("%.6g", sim.pair_rate) << '\n';
    out << "singles_per_s = " << fmt("%.6g", sim.singles_rates[0]) << " " << fmt("%.6g", sim.singles_rates[1])
        << " " << fmt("%.6g", sim.singles_rates[2]) << " " << fmt("%.6g", sim.singles_rates[3]) << '\n';
    const auto expected = expected_bell(cfg);
    const HistogramGeometry& g = expected[0].geometry;
    if (const auto bin = g.bin_of(52e-9)) {
      std::array<Estimate, 4> E{};
      for (std::size_t k = 0; k < 4; ++k) {
        std::array<double, 4> counts{};
        for (std::size_t p = 0; p < 4; ++p) counts[p] = expected[k].counts[p][*bin];
        E[k] = estimate_E_four(counts);
      }
      const BellEstimate b = estimate_S(E, g.bin_center(*bin), cfg.bell);
      out << "expected_S(52 ns bin) = " << fmt("%.4f", b.S) << " +- " << fmt("%.4f", b.sigma_S) << '\n';
    }
  } catch (const std::exception& e) {
    out << "source = unavailable (" << e.what() << ")\n";
  }

  for (const auto& f : files) {
    const CsvTable t = read_csv(fs::path(f));
    out << "[" << f << "]\n";
    for (const auto& line : t.comments) out << "# " << line << '\n';
    out << "rows = " << t.rows.size() << '\n';
    if (t.has_column("S")) {
      const auto tau = t.column("tau_ns");
      const auto S = t.column("S");
      const auto sS = t.column("sS");
      std::size_t best = S.size();
      std::size_t significant = 0;
      for (std::size_t i = 0; i < S.size(); ++i) {
        if (std::isnan(S[i])) continue;
        if (best == S.size() || std::abs(S[i]) > std::abs(S[best])) best = i;
        if (std::abs(S[i]) - 2.0 > 3.0 * sS[i]) ++significant;
      }
      if (best < S.size()) {
        out << "max_abs_S = " << fmt("%.4f", S[best]) << " +- " << fmt("%.4f", sS[best]) << " at "
            << fmt("%.6g", tau[best]) << " ns\n";
      }
      out << "bins_violating_3sigma = " << significant << '\n';
    } else if (t.has_column("c_pp")) {
      double sum = 0.0;
      for (double v : t.column("c_pp")) sum += std::isnan(v) ? 0.0 : v;
      out << "total_c_pp = " << fmt("%.9g", sum) << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-bin Bell test simulator and analysis toolkit", "binbell"};
  app.require_subcommand(1);
  Common common;

  auto* simulate = app.add_subcommand("simulate", "Simulate a time-tag run into a BNB1 file");
  add_common(simulate, common);
  std::optional<int> setting;
  simulate->add_option("--setting", setting, "Simulate Bell setting 1..4 instead of [phases]");

  auto* analyze = app.add_subcommand("analyze", "Histogram BNB1 files into coincidence and g2 CSVs");
  add_common(analyze, common);
  std::vector<std::string> analyze_files;
  analyze->add_option("files", analyze_files, "BNB1 files; histograms are summed")->required();

  auto* bell = app.add_subcommand("bell", "CHSH S(tau) from four runs, a config, or the model");
  add_common(bell, common);
  std::vector<std::string> bell_files;
  bool expected = false;
  std::optional<double> bell_tau;
  bell->add_option("files", bell_files, "Four BNB1 files in setting order");
  bell->add_flag("--expected", expected, "Use noiseless model expectations");
  bell->add_option("--tau-ns", bell_tau, "Also report S at this delay");

  auto* fit = app.add_subcommand("fit", "Fit a beating or fringe CSV");
  add_common(fit, common);
  std::vector<std::string> fit_files;
  std::string mode = "beating";
  std::string column;
  bool unweighted = false;
  std::optional<double> beat_mhz;
  fit->add_option("files", fit_files, "CSV files (two fringes give S from visibilities)")->required();
  fit->add_option("--mode", mode, "beating or fringe");
  fit->add_option("--column", column, "Column to fit (default beat_pp or c_pp)");
  fit->add_flag("--unweighted", unweighted, "Equal weights, sigma from residuals");
  fit->add_option("--beat-mhz", beat_mhz, "Beat frequency delta/2pi in MHz");

  auto* scan = app.add_subcommand("scan-phase", "Simulate a phi_s fringe at fixed delay");
  add_common(scan, common);
  std::string phi_as;
  std::optional<std::size_t> points;
  std::optional<double> scan_tau;
  scan->add_option("--phi-as", phi_as, "Anti-Stokes phase with unit, e.g. '0.25 pi'");
  scan->add_option("--points", points, "Number of phi_s values over [0, 2 pi)");
  scan->add_option("--tau-ns", scan_tau, "Delay of the coincidence window");

  auto* report = app.add_subcommand("report", "Summarize a configuration and result CSVs");
  add_common(report, common);
  std::vector<std::string> report_files;
  report->add_option("files", report_files, "Result CSV files");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(common, setting, out);
    if (*analyze) return cmd_analyze(common, analyze_files, out, err);
    if (*bell) return cmd_bell(common, bell_files, expected, bell_tau, out);
    if (*fit) return cmd_fit(common, fit_files, mode, column, unweighted, beat_mhz, out);
    if (*scan) return cmd_scan_phase(common, phi_as, points, scan_tau, out);
    if (*report) return cmd_report(common, report_files, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FitError& e) {
    err << "fit failed: " << e.what() << '\n';
    return kExitFit;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace binbell
