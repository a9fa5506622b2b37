#include <doctest.h>

#include <cmath>
#include <string>

#include "binbell/calibration.hpp"
#include "binbell/config.hpp"
#include "binbell/errors.hpp"

using namespace binbell;

TEST_CASE("quantities convert to canonical units") {
  CHECK(parse_quantity("52 ns", Dimension::Time) == doctest::Approx(52e-9));
  CHECK(parse_quantity("1.5us", Dimension::Time) == doctest::Approx(1.5e-6));
  CHECK(parse_quantity("250 ps", Dimension::Time) == doctest::Approx(250e-12));
  CHECK(parse_quantity("90 s", Dimension::Time) == 90.0);
  CHECK(parse_quantity("3 ms", Dimension::Time) == doctest::Approx(3e-3));

  CHECK(parse_quantity("0.25 pi", Dimension::Angle) == doctest::Approx(kPi / 4.0));
  CHECK(parse_quantity("-90 deg", Dimension::Angle) == doctest::Approx(-kPi / 2.0));
  CHECK(parse_quantity("1 rad", Dimension::Angle) == 1.0);

  // Hz-family beat frequencies are cycles per second.
  CHECK(parse_quantity("10 MHz", Dimension::AngularFrequency) == doctest::Approx(kTwoPi * 10e6));
  CHECK(parse_quantity("62831853.07 rad/s", Dimension::AngularFrequency) == doctest::Approx(kTwoPi * 10e6));
  CHECK(parse_quantity("1 GHz", Dimension::AngularFrequency) == doctest::Approx(kTwoPi * 1e9));

  // Rates are counts per second, no 2 pi.
  CHECK(parse_quantity("1.5 kHz", Dimension::Rate) == doctest::Approx(1500.0));
  CHECK(parse_quantity("1458 /s", Dimension::Rate) == 1458.0);
  CHECK(parse_quantity("1.5e8 /s2", Dimension::RateDensity) == 1.5e8);
  CHECK(parse_quantity("1.5e8 /s^2", Dimension::RateDensity) == 1.5e8);
  CHECK(parse_quantity("0.2", Dimension::Number) == 0.2);
}

TEST_CASE("bad quantities are rejected") {
  CHECK_THROWS_WITH_AS(parse_quantity("52", Dimension::Time), "missing unit in '52'", ConfigError);
  CHECK_THROWS_AS(parse_quantity("52 MHz", Dimension::Time), ConfigError);
  CHECK_THROWS_AS(parse_quantity("10 /s", Dimension::AngularFrequency), ConfigError);
  CHECK_THROWS_AS(parse_quantity("0.2 ns", Dimension::Number), ConfigError);
  CHECK_THROWS_AS(parse_quantity("ns", Dimension::Time), ConfigError);
  CHECK_THROWS_AS(parse_quantity("", Dimension::Time), ConfigError);
  CHECK_THROWS_AS(parse_quantity("inf s", Dimension::Time), ConfigError);
}

TEST_CASE("a written config parses field by field") {
  const std::string text = R"(
# two-photon source
[model]
peak_rate_density = 3.3e9 /s2
coherence_time = 220 ns
rise_time = 2 ns
accidental_floor = 1.5e8 /s2
beat_frequency = 10 MHz

[phases]
phi_s = 0 rad
phi_as = 0.25 pi

[plan]
joint_efficiency = 0.2
duty_cycle = 0.1
collection_time = 90 s

[source]
pair_rate = 1.4 kHz   # explicit
singles = 1700 /s
seed = 99

[analysis]
bin_width = 2 ns
gate = on
bell_window_bins = 3
sideband_lo = -300 ns

[scan]
points = 16

[output]
bell = out/bell.csv
)";
  const RunConfig c = parse_config(text);
  CHECK(c.peak_rate_density == 3.3e9);
  CHECK(c.coherence_time == doctest::Approx(220e-9));
  CHECK(c.beat_frequency == doctest::Approx(kTwoPi * 10e6));
  CHECK(c.phases.phi_as == doctest::Approx(kPi / 4.0));
  CHECK(c.duty_cycle == 0.1);
  REQUIRE(c.pair_rate.has_value());
  CHECK(*c.pair_rate == doctest::Approx(1400.0));
  REQUIRE(c.singles.has_value());
  for (double r : *c.singles) CHECK(r == 1700.0);
  CHECK(c.seed == 99);
  CHECK(c.analysis.bin_width == doctest::Approx(2e-9));
  CHECK(c.analysis.gate);
  CHECK(c.analysis.bell_window_bins == 3);
  CHECK(c.analysis.sideband.lo == doctest::Approx(-300e-9));
  CHECK(c.analysis.sideband.hi == doctest::Approx(-20e-9));
  CHECK(c.scan.points == 16);
  CHECK(c.output.bell == "out/bell.csv");
  CHECK(c.output.g2 == "g2.csv");
  CHECK(c.plan().bin_width == doctest::Approx(2e-9));
}

TEST_CASE("serialization round trips exactly") {
  RunConfig c = RunConfig::reference();
  CHECK(parse_config(serialize_config(c)) == c);
  c.pair_rate = 1234.5678901234567;
  c.singles = std::array<double, 4>{1.0 / 3.0, 2.0, 3.0, 4.0};
  c.analysis.gate = true;
  c.seed = 18446744073709551615ull;
  c.output.tags = "a b.bnb1";
  const RunConfig back = parse_config(serialize_config(c));
  CHECK(back == c);
  CHECK(back.singles.value()[0] == 1.0 / 3.0);
  CHECK(back.seed == c.seed);
  CHECK(back.output.tags == "a b.bnb1");
}

TEST_CASE("the reference preset reproduces the calibrated model") {
  const RunConfig c = RunConfig::reference();
  const auto m = c.model();
  const auto ref = reference::model();
  CHECK(m.coherence_time() == ref.coherence_time());
  CHECK(m.peak_rate_density() == ref.peak_rate_density());
  CHECK(visibility_at(m, 252e-9) == doctest::Approx(0.78).epsilon(1e-6));
  CHECK(c.phases == reference::bell_settings().setting(0));
  const auto sim = c.sim_config();
  CHECK_NOTHROW(sim.validate());
  CHECK(sim.config_digest == c.digest());
  CHECK(sim.seed == c.seed);
}

TEST_CASE("digest tracks physics, not seed or output paths") {
  const RunConfig a = RunConfig::reference();
  RunConfig b = a;
  b.seed = 77;
  b.output.bell = "elsewhere.csv";
  CHECK(a.digest() == b.digest());
  RunConfig c = a;
  c.collection_time = 91.0;
  CHECK(a.digest() != c.digest());
  RunConfig d = a;
  d.analysis.gate = true;
  CHECK(a.digest() != d.digest());
}

TEST_CASE("explicit pair rate still matches singles to the floor") {
  RunConfig c = RunConfig::reference();
  c.pair_rate = 1000.0;
  const auto sim = c.sim_config();
  CHECK(sim.pair_rate == 1000.0);
  CHECK_NOTHROW(sim.validate());
  c.pair_rate = 1e9;
  CHECK_THROWS_AS(c.sim_config(), ConfigError);
}

TEST_CASE("config errors name the line") {
  CHECK_THROWS_WITH_AS(parse_config("[model]\ncoherence_time = 220\n"), "line 2: missing unit in '220'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[nope]\n"), "line 1: unknown section [nope]", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[model]\nfoo = 1 s\n"), "line 2: unknown key model.foo", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("coherence_time = 1 ns\n"), "line 1: entry outside of a section", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[model]\nrise_time = 1 ns\nrise_time = 2 ns\n"),
                       "line 3: duplicate key model.rise_time", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[model]\nrise_time\n"), "line 2: expected 'key = value'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[model\n"), "line 1: unterminated section header", ConfigError);
  CHECK_THROWS_AS(parse_config("[analysis]\ngate = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[source]\nseed = -1\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[source]\nsingles_s_plus = 10 /s\n"), "missing singles_s_minus", ConfigError);
  CHECK_THROWS_AS(parse_config("[source]\nsingles = auto\nsingles_s_plus = 10 /s\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[analysis]\nbell_window_bins = 0\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/binbell.conf"), ConfigError);
}
