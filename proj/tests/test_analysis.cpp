#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "binbell/analysis.hpp"
#include "binbell/calibration.hpp"
#include "binbell/errors.hpp"
#include "binbell/simulator.hpp"

using namespace binbell;

namespace {

TimeTagStream random_stream(std::size_t n, std::uint64_t seed, std::uint64_t span_ticks) {
  std::mt19937_64 gen(seed);
  TimeTagStream s;
  for (std::size_t i = 0; i < n; ++i) {
    s.events.push_back({gen() % span_ticks, static_cast<Channel>(gen() % 4)});
  }
  // Force exact ties and bin-edge delays.
  s.events.push_back({5000, Channel::StokesPlus});
  s.events.push_back({5000, Channel::AntiStokesPlus});
  s.events.push_back({5000 + 7000, Channel::AntiStokesMinus});
  std::sort(s.events.begin(), s.events.end());
  s.header.run_length = span_ticks;
  return s;
}

/// Every (Stokes, anti-Stokes) pairing checked independently.
CoincidenceHistogram brute_force(const TimeTagStream& s, const HistogramGeometry& g) {
  CoincidenceHistogram h(g);
  for (const auto& a : s.events) {
    if (!is_stokes(a.channel)) continue;
    for (const auto& b : s.events) {
      if (is_stokes(b.channel)) continue;
      const std::int64_t d = static_cast<std::int64_t>(b.timestamp) - static_cast<std::int64_t>(a.timestamp);
      if (d < g.tau_min_ticks || d >= g.tau_max_ticks()) continue;
      const auto bin = static_cast<std::size_t>((d - g.tau_min_ticks) / g.bin_ticks);
      h.counts[ChannelPair(channel_sign(a.channel), channel_sign(b.channel)).index()][bin] += 1;
    }
  }
  for (const auto& e : s.events) ++h.singles[static_cast<std::size_t>(e.channel)];
  h.live_time = s.run_seconds();
  return h;
}

SimConfig reference_run(const PhaseSetting& phases, double T, std::uint64_t seed) {
  ExperimentPlan plan = reference::plan();
  plan.collection_time = T;
  return SimConfig::matched(reference::model(), phases, plan, seed);
}

/// Poisson resampling oracle for the standard deviation of E.
double resampled_sigma(const std::array<double, 4>& c, int replicates, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::array<std::poisson_distribution<int>, 4> draw{
      std::poisson_distribution<int>(c[0]), std::poisson_distribution<int>(c[1]),
      std::poisson_distribution<int>(c[2]), std::poisson_distribution<int>(c[3])};
  double sum = 0.0, sum2 = 0.0;
  int used = 0;
  for (int r = 0; r < replicates; ++r) {
    std::array<double, 4> x{};
    for (int i = 0; i < 4; ++i) x[i] = draw[i](gen);
    const double tot = x[0] + x[1] + x[2] + x[3];
    if (tot == 0.0) continue;
    const double e = (x[0] + x[3] - x[1] - x[2]) / tot;
    sum += e;
    sum2 += e * e;
    ++used;
  }
  const double mean = sum / used;
  return std::sqrt(sum2 / used - mean * mean);
}

}  // namespace

TEST_CASE("geometry") {
  const auto g = HistogramGeometry::from_seconds(1e-9, 0.0, 700e-9);
  CHECK(g.bins == 700);
  const auto g2 = HistogramGeometry::from_seconds(3e-9, -400e-9, 900e-9);
  CHECK(g2.bins == 434);  // ceil(1300/3)
  CHECK(g.bin_of(100e-9).value() == 100);
  CHECK(!g.bin_of(700e-9));
  CHECK(!g.bin_of(-1e-12));
  CHECK_THROWS_AS(HistogramGeometry::from_seconds(0.0, 0.0, 1e-9), DomainError);
  CHECK_THROWS_AS(HistogramGeometry::from_seconds(1e-9, 1e-9, 0.0), DomainError);
}

TEST_CASE("single pair lands in its bin") {
  TimeTagStream s;
  s.events = {{0, Channel::StokesPlus}, {100'000, Channel::AntiStokesPlus}};
  s.header.run_length = 200'000;
  const auto g = HistogramGeometry::from_seconds(1e-9, 0.0, 700e-9);
  const auto h = histogram_coincidences(s, g);
  CHECK(h.counts[0][100] == 1);
  CHECK(h.total(0) == 1);
  for (std::size_t p = 1; p < 4; ++p) CHECK(h.total(p) == 0);
}

TEST_CASE("sweep equals brute-force pairing bit for bit") {
  const auto g = HistogramGeometry::from_seconds(1e-9, -400e-9, 900e-9);
  const auto coarse = HistogramGeometry::from_seconds(7e-9, -3e-9, 50e-9);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    // Dense enough that most Stokes tags see several anti-Stokes tags in range.
    const auto s = random_stream(10000, seed, 10000ull * 300'000ull / 4);
    CHECK(histogram_coincidences(s, g) == brute_force(s, g));
    CHECK(histogram_coincidences(s, coarse) == brute_force(s, coarse));
  }
}

TEST_CASE("unsorted and empty streams") {
  TimeTagStream s;
  const auto g = HistogramGeometry::from_seconds(1e-9, 0.0, 10e-9);
  const auto h = histogram_coincidences(s, g);
  for (std::size_t p = 0; p < 4; ++p) CHECK(h.total(p) == 0);
  s.events = {{10, Channel::StokesPlus}, {5, Channel::AntiStokesPlus}};
  CHECK_THROWS_WITH_AS(histogram_coincidences(s, g), "time-tag stream is not sorted", DataError);
}

TEST_CASE("histogram merge is an element-wise sum") {
  const auto g = HistogramGeometry::from_seconds(2e-9, -50e-9, 200e-9);
  const auto a = random_stream(3000, 10, 1'000'000'000);
  const auto b = random_stream(3000, 11, 1'000'000'000);
  const auto c = random_stream(3000, 12, 1'000'000'000);
  const auto ha = histogram_coincidences(a, g);
  const auto hb = histogram_coincidences(b, g);
  const auto hc = histogram_coincidences(c, g);
  auto ab = ha;
  ab.merge(hb);
  auto ba = hb;
  ba.merge(ha);
  CHECK(ab == ba);
  auto ab_c = ab;
  ab_c.merge(hc);
  auto bc = hb;
  bc.merge(hc);
  auto a_bc = ha;
  a_bc.merge(bc);
  CHECK(ab_c == a_bc);
  const std::vector<TimeTagStream> both{a, b};
  CHECK(histogram_streams(both, g) == ab);

  // Concatenating time-disjoint runs counts the same pairs.
  TimeTagStream joined = a;
  const std::uint64_t offset = a.header.run_length + 10'000'000;
  for (auto e : b.events) {
    e.timestamp += offset;
    joined.events.push_back(e);
  }
  joined.header.run_length = offset + b.header.run_length;
  const auto hj = histogram_coincidences(joined, g);
  CHECK(hj.counts == ab.counts);
  CHECK(hj.singles == ab.singles);

  const auto other = HistogramGeometry::from_seconds(1e-9, -50e-9, 200e-9);
  CoincidenceHistogram mismatched(other);
  CHECK_THROWS_AS(ab.merge(mismatched), DataError);
}

TEST_CASE("simulated runs merge like their histograms") {
  const auto g = HistogramGeometry::from_seconds(1e-9, -100e-9, 400e-9);
  const auto phases = reference::bell_settings().setting(0);
  const auto s1 = simulate_run(reference_run(phases, 5.0, 100));
  const auto s2 = simulate_run(reference_run(phases, 5.0, 101));
  auto h = histogram_coincidences(s1, g);
  h.merge(histogram_coincidences(s2, g));
  const std::vector<TimeTagStream> runs{s1, s2};
  CHECK(histogram_streams(runs, g) == h);
}

TEST_CASE("active gate keeps true pairs and drops off-window accidentals") {
  const auto phases = reference::bell_settings().setting(0);
  const SimConfig cfg = reference_run(phases, 200.0, 55);
  const auto s = simulate_run(cfg);
  const auto g = HistogramGeometry::from_seconds(1e-9, -400e-9, 900e-9);
  const auto open = histogram_coincidences(s, g);
  const auto gated = histogram_coincidences(s, g, ActiveGate{cfg.window_period, cfg.plan.duty_cycle});
  CHECK(gated.live_time == doctest::Approx(open.live_time * cfg.plan.duty_cycle));
  const auto po = PairCounts::from_histogram(open);
  const auto pg = PairCounts::from_histogram(gated);
  const auto fo = estimate_common_floor(po, {});
  const auto fg = estimate_common_floor(pg, {});
  // Oracle: drop the off-window Stokes tags by hand and histogram without a gate.
  const std::uint64_t period = 10'000'000;
  const std::uint64_t active = 1'000'000;
  TimeTagStream filtered = s;
  std::erase_if(filtered.events, [&](const DetectionEvent& e) {
    return is_stokes(e.channel) && e.timestamp % period >= active;
  });
  const auto by_hand = histogram_coincidences(filtered, g);
  CHECK(by_hand.counts == gated.counts);
  // Singles carry no window structure, so their accidentals shrink by the duty cycle.
  CHECK(fg.mean < 0.5 * fo.mean);
  double excess_open = 0.0, excess_gated = 0.0;
  for (std::size_t p = 0; p < 4; ++p) {
    for (std::size_t i = 0; i < g.bins; ++i) {
      CHECK(gated.counts[p][i] <= open.counts[p][i]);
      const double tau = g.bin_center(i);
      if (tau > 0.0 && tau < 500e-9) {
        excess_open += po.counts[p][i] - fo.mean;
        excess_gated += pg.counts[p][i] - fg.mean;
      }
    }
  }
  CHECK(excess_gated == doctest::Approx(excess_open).epsilon(0.05));
}

TEST_CASE("floor normalization") {
  const auto g = HistogramGeometry::from_seconds(1e-9, -400e-9, 900e-9);
  CoincidenceHistogram flat(g);
  std::mt19937_64 gen(1);
  std::poisson_distribution<int> draw(400.0);
  for (auto& c : flat.counts) {
    for (auto& v : c) v = static_cast<std::uint64_t>(draw(gen));
  }
  const auto series = normalize_g2(flat, ChannelPair(1, 1));
  double mean = 0.0;
  for (double v : series.value) mean += v;
  mean /= static_cast<double>(series.value.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));

  auto scaled = flat;
  for (auto& c : scaled.counts) {
    for (auto& v : c) v *= 3;
  }
  const auto series3 = normalize_g2(scaled, ChannelPair(1, 1));
  for (std::size_t i = 0; i < series.value.size(); ++i) {
    CHECK(series3.value[i] == doctest::Approx(series.value[i]).epsilon(1e-12));
  }

  CHECK_THROWS_WITH_AS(normalize_g2(flat, ChannelPair(1, 1), Sideband{2e-6, 3e-6}),
                       "cannot estimate floor: sideband has no bins", DataError);
  CoincidenceHistogram empty(g);
  CHECK_THROWS_AS(normalize_g2(empty, ChannelPair(1, 1)), DataError);
}

TEST_CASE("normalized simulated envelope follows the model") {
  const auto model = reference::model();
  const auto phases = reference::bell_settings().setting(0);
  const auto s = simulate_run(reference_run(phases, 900.0, 7));
  const auto g = HistogramGeometry::from_seconds(1e-9, -400e-9, 900e-9);
  const auto h = histogram_coincidences(s, g);
  const auto env = envelope_g2(h);
  // Average over the plateau around the peak.
  double sum = 0.0, var = 0.0, oracle = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < g.bins; ++i) {
    const double tau = g.bin_center(i);
    if (tau < 5e-9 || tau > 25e-9) continue;
    sum += env.value[i];
    var += env.sigma[i] * env.sigma[i];
    oracle += g2_envelope(model, tau);
    ++n;
  }
  CHECK(std::abs(sum / n - oracle / n) < 3.0 * std::sqrt(var) / n);

  // The sideband sits where the envelope is already flat.
  CHECK(env.floor.mean == doctest::Approx(model.accidental_floor() * reference::plan().exposure() * 10.0).epsilon(0.05));

  // Beating normalized to its own envelope swings within [0, 2] near the peak.
  const auto beat = normalized_beating(h, ChannelPair(1, 1));
  for (std::size_t i = 0; i < g.bins; ++i) {
    const double tau = g.bin_center(i);
    if (tau > 5e-9 && tau < 100e-9) {
      CHECK(beat.value[i] > -4.0 * beat.sigma[i]);
      CHECK(beat.value[i] < 2.0 + 4.0 * beat.sigma[i]);
    }
  }
}

TEST_CASE("E from four detectors") {
  CHECK(estimate_E_four({100, 0, 0, 100}).value == 1.0);
  CHECK(estimate_E_four({100, 0, 0, 100}).sigma == 0.0);
  CHECK(estimate_E_four({50, 50, 50, 50}).value == 0.0);
  const auto e = estimate_E_four({90, 10, 10, 90});
  CHECK(e.value == doctest::Approx(0.8));
  const double oracle = resampled_sigma({90, 10, 10, 90}, 100000, 99);
  CHECK(std::abs(oracle - 0.042) < 0.005);
  CHECK(std::abs(e.sigma - 0.042) < 0.005);
  CHECK_THROWS_WITH_AS(estimate_E_four({0, 0, 0, 0}), "empty bin", DataError);
  CHECK_THROWS_AS(estimate_E_four({-1, 2, 3, 4}), DataError);
}

TEST_CASE("propagated sigma_E agrees with resampling for counts >= 25") {
  const std::vector<std::array<double, 4>> cells{
      {25, 25, 25, 25}, {25, 40, 60, 25}, {200, 30, 30, 200}, {500, 480, 30, 25}, {1000, 100, 120, 900}};
  std::uint64_t seed = 1;
  for (const auto& c : cells) {
    const double oracle = resampled_sigma(c, 100000, seed++);
    CHECK_MESSAGE(std::abs(estimate_E_four(c).sigma / oracle - 1.0) < 0.10, c[0] << "," << c[1]);
  }
}

TEST_CASE("E from two detectors") {
  CHECK(estimate_E_two(40, 40).value == 0.0);
  CHECK(estimate_E_two(40, 0).value == 1.0);
  const auto e = estimate_E_two(90, 10);
  CHECK(e.value == doctest::Approx(0.8));
  CHECK(e.sigma == doctest::Approx(2.0 * std::sqrt(90.0 * 10.0 / 1e6)));
  CHECK_THROWS_AS(estimate_E_two(0, 0), DataError);
}

TEST_CASE("two-detector and four-detector E agree on paired runs") {
  const auto g = HistogramGeometry::from_seconds(10e-9, 0.0, 400e-9);
  const PhaseSetting base{0.0, kPi / 4.0};
  const PhaseSetting flipped{kPi, kPi / 4.0};
  const auto h1 = PairCounts::from_histogram(histogram_coincidences(simulate_run(reference_run(base, 300.0, 31)), g));
  const auto h2 = PairCounts::from_histogram(histogram_coincidences(simulate_run(reference_run(flipped, 300.0, 32)), g));
  for (std::size_t i = 0; i < g.bins; ++i) {
    const auto four = estimate_E_four({h1.counts[0][i], h1.counts[1][i], h1.counts[2][i], h1.counts[3][i]});
    const auto two = estimate_E_two(h1.counts[0][i], h2.counts[0][i]);
    const double combined = std::hypot(four.sigma, two.sigma);
    CHECK_MESSAGE(std::abs(four.value - two.value) <= 3.0 * combined, "bin " << i);
  }
}

TEST_CASE("S from four correlation coefficients") {
  const auto s4 = estimate_S({Estimate{1, 0}, Estimate{-1, 0}, Estimate{1, 0}, Estimate{1, 0}});
  CHECK(s4.S == 4.0);
  CHECK(s4.supra_quantum);
  const double r = 1.0 / std::sqrt(2.0);
  const auto ideal = estimate_S({Estimate{r, 0.01}, Estimate{-r, 0.02}, Estimate{r, 0.02}, Estimate{r, 0.04}});
  CHECK(ideal.S == doctest::Approx(kTsirelson));
  CHECK(!ideal.supra_quantum);
  CHECK(ideal.sigma_S == doctest::Approx(std::sqrt(0.0001 + 0.0004 + 0.0004 + 0.0016)));
}

TEST_CASE("noiseless scan reproduces the closed form") {
  const auto model = reference::model();
  const auto settings = reference::bell_settings();
  const auto plan = reference::plan();
  const auto g = HistogramGeometry::from_seconds(1e-9, -400e-9, 900e-9);
  std::array<PairCounts, 4> runs;
  for (std::size_t k = 0; k < 4; ++k) runs[k] = PairCounts::expected(model, settings.setting(k), plan, g);
  const auto scan = scan_S(runs, settings);
  REQUIRE(scan.size() == g.bins);
  for (const auto& p : scan) {
    REQUIRE(p.estimate.has_value());
    const double closed = bell_S_closed_form(model, settings.phi_s, settings.phi_as, p.tau);
    CHECK(std::abs(p.estimate->S - closed) < 1e-9);
  }

  auto other = runs;
  other[2].geometry = HistogramGeometry::from_seconds(2e-9, -400e-9, 900e-9);
  CHECK_THROWS_AS(scan_S(other, settings), DataError);

  auto holes = runs;
  for (auto& c : holes[1].counts) c[10] = 0.0;
  const auto gapped = scan_S(holes, settings);
  CHECK(!gapped[10].estimate.has_value());
  CHECK(gapped[11].estimate.has_value());

  const auto windowed = scan_S(runs, settings, 4);
  CHECK(windowed.size() == g.bins / 4);
  CHECK(windowed[0].tau == doctest::Approx(-398e-9));
}

TEST_CASE("calibrated simulation violates the bound inside the window") {
  const auto settings = reference::bell_settings();
  const auto g = HistogramGeometry::from_seconds(1e-9, -400e-9, 900e-9);
  std::array<PairCounts, 4> runs;
  for (std::size_t k = 0; k < 4; ++k) {
    runs[k] = PairCounts::from_histogram(
        histogram_coincidences(simulate_run(reference_run(settings.setting(k), 90.0, 500 + k)), g));
  }
  const auto scan = scan_S(runs, settings);
  bool violated = false;
  for (const auto& p : scan) {
    if (p.tau > 0.0 && p.tau <= 350e-9 && p.estimate && std::abs(p.estimate->S) > 2.0) violated = true;
  }
  CHECK(violated);
}

TEST_CASE("phase-shifted reanalysis tracks the visibility envelope") {
  const auto model = reference::model();
  const auto g = HistogramGeometry::from_seconds(4e-9, 0.0, 400e-9);
  // S at a global phase offset alpha is 2 sqrt(2) V cos(phase + alpha); the two
  // quadratures alpha = 0 and alpha = pi/2 give the envelope amplitude.
  std::array<std::vector<BellScanPoint>, 2> scans;
  for (int q = 0; q < 2; ++q) {
    const auto settings = BellSettings::canonical(q * kPi / 2.0, kPi / 4.0);
    std::array<PairCounts, 4> runs;
    for (std::size_t k = 0; k < 4; ++k) {
      runs[k] = PairCounts::from_histogram(
          histogram_coincidences(simulate_run(reference_run(settings.setting(k), 1000.0, 900 + 10 * q + k)), g));
    }
    scans[q] = scan_S(runs, settings);
  }
  for (std::size_t i = 5; i < g.bins; i += 10) {
    const auto& a = *scans[0][i].estimate;
    const auto& b = *scans[1][i].estimate;
    const double amp = std::hypot(a.S, b.S);
    const double sigma = std::hypot(a.S * a.sigma_S, b.S * b.sigma_S) / amp;
    // Averaging the beat over a bin of width w attenuates it by sinc(delta w / 2).
    const double x = 0.5 * model.beat_frequency() * g.bin_width();
    const double envelope = kTsirelson * visibility_at(model, g.bin_center(i)) * std::sin(x) / x;
    CHECK_MESSAGE(std::abs(amp - envelope) < 3.0 * sigma, "tau " << g.bin_center(i) * 1e9 << " ns");
  }
}
