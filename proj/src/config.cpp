#include "binbell/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "binbell/calibration.hpp"
#include "binbell/errors.hpp"

namespace binbell {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct UnitScale {
  std::string_view unit;
  double scale;
};

const std::vector<UnitScale>& units_for(Dimension dim) {
  static const std::vector<UnitScale> time{{"ps", 1e-12}, {"ns", 1e-9}, {"us", 1e-6}, {"ms", 1e-3}, {"s", 1.0}};
  static const std::vector<UnitScale> angle{{"rad", 1.0}, {"deg", kPi / 180.0}, {"pi", kPi}};
  static const std::vector<UnitScale> angular{
      {"rad/s", 1.0}, {"Hz", kTwoPi}, {"kHz", kTwoPi * 1e3}, {"MHz", kTwoPi * 1e6}, {"GHz", kTwoPi * 1e9}};
  static const std::vector<UnitScale> rate{{"/s", 1.0}, {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}};
  static const std::vector<UnitScale> density{{"/s2", 1.0}, {"/s^2", 1.0}};
  static const std::vector<UnitScale> none{};
  switch (dim) {
    case Dimension::Time: return time;
    case Dimension::Angle: return angle;
    case Dimension::AngularFrequency: return angular;
    case Dimension::Rate: return rate;
    case Dimension::RateDensity: return density;
    case Dimension::Number: return none;
  }
  return none;
}

const char* canonical_unit(Dimension dim) {
  switch (dim) {
    case Dimension::Time: return " s";
    case Dimension::Angle: return " rad";
    case Dimension::AngularFrequency: return " rad/s";
    case Dimension::Rate: return " /s";
    case Dimension::RateDensity: return " /s2";
    case Dimension::Number: return "";
  }
  return "";
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t parse_uint(std::string_view text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("expected a non-negative integer, got '" + t + "'");
  }
  return v;
}

bool parse_bool(std::string_view text) {
  const std::string t = trim(text);
  if (t == "on" || t == "true" || t == "yes" || t == "1") return true;
  if (t == "off" || t == "false" || t == "no" || t == "0") return false;
  throw ConfigError("expected on/off, got '" + t + "'");
}

struct NumberKey {
  const char* section;
  const char* key;
  Dimension dim;
  std::function<double&(RunConfig&)> ref;
};

const std::vector<NumberKey>& number_keys() {
  static const std::vector<NumberKey> keys{
      {"model", "peak_rate_density", Dimension::RateDensity, [](RunConfig& c) -> double& { return c.peak_rate_density; }},
      {"model", "coherence_time", Dimension::Time, [](RunConfig& c) -> double& { return c.coherence_time; }},
      {"model", "rise_time", Dimension::Time, [](RunConfig& c) -> double& { return c.rise_time; }},
      {"model", "accidental_floor", Dimension::RateDensity, [](RunConfig& c) -> double& { return c.accidental_floor; }},
      {"model", "beat_frequency", Dimension::AngularFrequency, [](RunConfig& c) -> double& { return c.beat_frequency; }},
      {"phases", "phi_s", Dimension::Angle, [](RunConfig& c) -> double& { return c.phases.phi_s; }},
      {"phases", "phi_as", Dimension::Angle, [](RunConfig& c) -> double& { return c.phases.phi_as; }},
      {"bell", "phi_s", Dimension::Angle, [](RunConfig& c) -> double& { return c.bell.phi_s; }},
      {"bell", "phi_s_prime", Dimension::Angle, [](RunConfig& c) -> double& { return c.bell.phi_s_prime; }},
      {"bell", "phi_as", Dimension::Angle, [](RunConfig& c) -> double& { return c.bell.phi_as; }},
      {"bell", "phi_as_prime", Dimension::Angle, [](RunConfig& c) -> double& { return c.bell.phi_as_prime; }},
      {"plan", "joint_efficiency", Dimension::Number, [](RunConfig& c) -> double& { return c.joint_efficiency; }},
      {"plan", "duty_cycle", Dimension::Number, [](RunConfig& c) -> double& { return c.duty_cycle; }},
      {"plan", "collection_time", Dimension::Time, [](RunConfig& c) -> double& { return c.collection_time; }},
      {"source", "window_period", Dimension::Time, [](RunConfig& c) -> double& { return c.window_period; }},
      {"source", "shard_length", Dimension::Time, [](RunConfig& c) -> double& { return c.shard_length; }},
      {"analysis", "bin_width", Dimension::Time, [](RunConfig& c) -> double& { return c.analysis.bin_width; }},
      {"analysis", "tau_min", Dimension::Time, [](RunConfig& c) -> double& { return c.analysis.tau_min; }},
      {"analysis", "tau_max", Dimension::Time, [](RunConfig& c) -> double& { return c.analysis.tau_max; }},
      {"analysis", "sideband_lo", Dimension::Time, [](RunConfig& c) -> double& { return c.analysis.sideband.lo; }},
      {"analysis", "sideband_hi", Dimension::Time, [](RunConfig& c) -> double& { return c.analysis.sideband.hi; }},
      {"scan", "tau", Dimension::Time, [](RunConfig& c) -> double& { return c.scan.tau; }},
      {"scan", "width", Dimension::Time, [](RunConfig& c) -> double& { return c.scan.width; }},
      {"scan", "collection_time", Dimension::Time, [](RunConfig& c) -> double& { return c.scan.collection_time; }},
  };
  return keys;
}

const std::array<const char*, kChannelCount> kSinglesKeys{"singles_s_plus", "singles_s_minus",
                                                          "singles_as_plus", "singles_as_minus"};

struct StringKey {
  const char* key;
  std::string OutputPaths::*field;
};

const std::array<StringKey, 5> kOutputKeys{{{"tags", &OutputPaths::tags},
                                            {"histogram", &OutputPaths::histogram},
                                            {"g2", &OutputPaths::g2},
                                            {"bell", &OutputPaths::bell},
                                            {"fringe", &OutputPaths::fringe}}};

}  // namespace

double parse_quantity(std::string_view text, Dimension dim) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("missing value");
  const char* begin = t.data();
  char* end = nullptr;
  const double number = std::strtod(begin, &end);
  if (end == begin) throw ConfigError("expected a number, got '" + t + "'");
  const std::string unit = trim(std::string_view(end));
  if (!std::isfinite(number)) throw ConfigError("value must be finite: '" + t + "'");
  if (dim == Dimension::Number) {
    if (!unit.empty()) throw ConfigError("unexpected unit '" + unit + "' on dimensionless value");
    return number;
  }
  if (unit.empty()) throw ConfigError("missing unit in '" + t + "'");
  for (const auto& u : units_for(dim)) {
    if (unit == u.unit) return number * u.scale;
  }
  std::string allowed;
  for (const auto& u : units_for(dim)) allowed += (allowed.empty() ? "" : ", ") + std::string(u.unit);
  throw ConfigError("unit '" + unit + "' not accepted here (use one of: " + allowed + ")");
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

RunConfig RunConfig::reference() {
  RunConfig c;
  const WavepacketModel m = reference::model();
  c.peak_rate_density = m.peak_rate_density();
  c.coherence_time = m.coherence_time();
  c.rise_time = m.rise_time();
  c.accidental_floor = m.accidental_floor();
  c.beat_frequency = m.beat_frequency();
  c.bell = reference::bell_settings();
  c.phases = c.bell.setting(0);
  const ExperimentPlan p = reference::plan();
  c.joint_efficiency = p.joint_efficiency;
  c.duty_cycle = p.duty_cycle;
  c.collection_time = p.collection_time;
  c.analysis.bin_width = p.bin_width;
  c.window_period = reference::kWindowPeriod;
  return c;
}

WavepacketModel RunConfig::model() const {
  WavepacketParams p;
  p.peak_rate_density = peak_rate_density;
  p.coherence_time = coherence_time;
  p.rise_time = rise_time;
  p.accidental_floor = accidental_floor;
  p.beat_frequency = beat_frequency;
  return WavepacketModel(p);
}

ExperimentPlan RunConfig::plan() const {
  ExperimentPlan p;
  p.joint_efficiency = joint_efficiency;
  p.duty_cycle = duty_cycle;
  p.bin_width = analysis.bin_width;
  p.collection_time = collection_time;
  return p;
}

SimConfig RunConfig::sim_config(const PhaseSetting& ph) const {
  const WavepacketModel m = model();
  const ExperimentPlan p = plan();
  SimConfig cfg(m);
  if (!pair_rate || !singles) {
    cfg = SimConfig::matched(m, ph, p, seed);
  }
  cfg.phases = ph;
  cfg.plan = p;
  cfg.seed = seed;
  if (pair_rate) cfg.pair_rate = *pair_rate;
  if (singles) {
    cfg.singles_rates = *singles;
  } else if (pair_rate) {
    // Singles still matched, now against the explicit pair rate.
    try {
      cfg.singles_rates.fill(SimConfig::matched_singles_rate(m, p, *pair_rate));
    } catch (const DomainError&) {
      throw ConfigError("pair rate alone exceeds the accidental floor");
    }
  }
  cfg.window_period = window_period;
  cfg.shard_length = shard_length;
  cfg.config_digest = digest();
  return cfg;
}

std::uint64_t RunConfig::digest() const {
  const std::string text = serialize_config(*this, false);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string serialize_config(const RunConfig& config, bool include_run_fields) {
  RunConfig c = config;
  std::ostringstream out;
  std::string current;
  auto section = [&](const char* name) {
    if (current != name) {
      out << (current.empty() ? "" : "\n") << '[' << name << "]\n";
      current = name;
    }
  };
  for (const auto& k : number_keys()) {
    if (std::string_view(k.section) == "source" && current != "source") {
      section("source");
      out << "pair_rate = " << (c.pair_rate ? exact(*c.pair_rate) + " /s" : "auto") << '\n';
      if (c.singles) {
        for (std::size_t i = 0; i < kChannelCount; ++i) {
          out << kSinglesKeys[i] << " = " << exact((*c.singles)[i]) << " /s\n";
        }
      } else {
        out << "singles = auto\n";
      }
      if (include_run_fields) out << "seed = " << c.seed << '\n';
    }
    if (std::string_view(k.section) == "scan" && current == "analysis") {
      out << "gate = " << (c.analysis.gate ? "on" : "off") << '\n';
      out << "bell_window_bins = " << c.analysis.bell_window_bins << '\n';
    }
    section(k.section);
    out << k.key << " = " << exact(k.ref(c)) << canonical_unit(k.dim) << '\n';
  }
  out << "points = " << c.scan.points << '\n';
  if (include_run_fields) {
    section("output");
    for (const auto& k : kOutputKeys) out << k.key << " = " << c.output.*k.field << '\n';
  }
  return out.str();
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::string section;
  std::map<std::string, bool> seen;
  std::array<std::optional<double>, kChannelCount> singles_parts{};
  bool singles_auto = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        static const std::vector<std::string> known{"model", "phases", "bell", "plan", "source",
                                                    "analysis", "scan", "output"};
        if (std::find(known.begin(), known.end(), section) == known.end()) {
          throw ConfigError("unknown section [" + section + "]");
        }
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value'");
      if (section.empty()) throw ConfigError("entry outside of a section");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      const std::string full = section + "." + key;
      if (seen[full]) throw ConfigError("duplicate key " + full);
      seen[full] = true;

      bool handled = false;
      for (const auto& k : number_keys()) {
        if (section == k.section && key == k.key) {
          k.ref(c) = parse_quantity(value, k.dim);
          handled = true;
          break;
        }
      }
      if (handled) continue;
      if (section == "source" && key == "pair_rate") {
        if (value == "auto") {
          c.pair_rate.reset();
        } else {
          c.pair_rate = parse_quantity(value, Dimension::Rate);
        }
      } else if (section == "source" && key == "singles") {
        if (value == "auto") {
          singles_auto = true;
        } else {
          const double r = parse_quantity(value, Dimension::Rate);
          singles_parts.fill(r);
        }
      } else if (section == "source" && key == "seed") {
        c.seed = parse_uint(value);
      } else if (section == "analysis" && key == "gate") {
        c.analysis.gate = parse_bool(value);
      } else if (section == "analysis" && key == "bell_window_bins") {
        c.analysis.bell_window_bins = parse_uint(value);
      } else if (section == "scan" && key == "points") {
        c.scan.points = parse_uint(value);
      } else if (section == "source") {
        bool found = false;
        for (std::size_t i = 0; i < kChannelCount; ++i) {
          if (key == kSinglesKeys[i]) {
            singles_parts[i] = parse_quantity(value, Dimension::Rate);
            found = true;
          }
        }
        if (!found) throw ConfigError("unknown key " + full);
      } else if (section == "output") {
        bool found = false;
        for (const auto& k : kOutputKeys) {
          if (key == k.key) {
            c.output.*k.field = value;
            found = true;
          }
        }
        if (!found) throw ConfigError("unknown key " + full);
      } else {
        throw ConfigError("unknown key " + full);
      }
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  const bool any_part = std::any_of(singles_parts.begin(), singles_parts.end(),
                                    [](const auto& v) { return v.has_value(); });
  if (any_part) {
    if (singles_auto) throw ConfigError("singles = auto conflicts with explicit singles rates");
    std::array<double, kChannelCount> rates{};
    for (std::size_t i = 0; i < kChannelCount; ++i) {
      if (!singles_parts[i]) throw ConfigError(std::string("missing ") + kSinglesKeys[i]);
      rates[i] = *singles_parts[i];
    }
    c.singles = rates;
  }
  if (c.analysis.bell_window_bins == 0) throw ConfigError("bell_window_bins must be >= 1");
  if (c.scan.points == 0) throw ConfigError("scan points must be >= 1");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace binbell
