#include "binbell/calibration.hpp"

#include <cmath>

#include "binbell/errors.hpp"

namespace binbell {

namespace {

// g0 - 1 for a given visibility.
double excess_g2(double v) { return (1.0 + v) / (1.0 - v) - 1.0; }

template <typename F>
double bisect(F&& f, double lo, double hi, double tolerance) {
  double f_lo = f(lo);
  for (int i = 0; i < 200 && hi - lo > tolerance; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

RiseDecayCalibration calibrate_rise_decay(VisibilityPoint early, VisibilityPoint late,
                                          double rise_time) {
  if (!(early.tau > 0.0 && late.tau > early.tau)) {
    throw DomainError("calibration points must satisfy 0 < early.tau < late.tau");
  }
  for (const auto& p : {early, late}) {
    if (!(p.visibility > 0.0 && p.visibility < 1.0)) {
      throw DomainError("calibration visibilities must lie in (0, 1)");
    }
  }
  const double target = std::log(excess_g2(early.visibility) / excess_g2(late.visibility));
  if (!(target > 0.0)) {
    throw DomainError("calibration requires the visibility to decrease with delay");
  }

  // log f(early)/f(late) falls monotonically as the decay constant grows.
  auto mismatch = [&](double decay) {
    const RiseDecayShape shape(rise_time, decay);
    return std::log(shape.value(early.tau) / shape.value(late.tau)) - target;
  };
  double lo = 1e-3 * (late.tau - early.tau);
  double hi = 1e3 * late.tau;
  if (mismatch(lo) < 0.0 || mismatch(hi) > 0.0) {
    throw DomainError("no rise-decay envelope reproduces the calibration points");
  }
  const double decay = bisect(mismatch, lo, hi, 1e-15 * hi);

  const RiseDecayShape shape(rise_time, decay);
  RiseDecayCalibration out;
  out.coherence_time = decay;
  out.rise_time = rise_time;
  out.excess_ratio = excess_g2(late.visibility) / shape.value(late.tau);
  out.peak_g2 = 1.0 + out.excess_ratio * shape.peak_value();
  return out;
}

WavepacketModel make_rise_decay_model(const RiseDecayCalibration& calibration,
                                      double accidental_floor, double beat_frequency) {
  WavepacketParams params;
  params.accidental_floor = accidental_floor;
  params.peak_rate_density = calibration.peak_g2 * accidental_floor;
  params.coherence_time = calibration.coherence_time;
  params.rise_time = calibration.rise_time;
  params.beat_frequency = beat_frequency;
  return WavepacketModel(params);
}

std::optional<DelayInterval> visibility_above(const WavepacketModel& model, double threshold,
                                              double tolerance) {
  const auto& shape = model.shape();
  const double peak = shape.peak_time();
  const double probe = peak > 0.0 ? peak : 1e-6 * shape.support_end();
  auto excess = [&](double tau) { return visibility_at(model, tau) - threshold; };
  if (!(excess(probe) > 0.0)) return std::nullopt;

  const double end = shape.support_end();
  DelayInterval interval;
  interval.lower = peak > 0.0 ? bisect(excess, 0.0, probe, tolerance) : 0.0;
  interval.upper = excess(end) > 0.0 ? end : bisect(excess, probe, end, tolerance);
  return interval;
}

namespace reference {

BellSettings bell_settings() { return BellSettings::canonical(0.0, kPi / 4.0); }

RiseDecayCalibration calibration() {
  return calibrate_rise_decay(kEarlyVisibility, kLateVisibility, kRiseTime);
}

WavepacketModel model() {
  return make_rise_decay_model(calibration(), kAccidentalFloor, kBeatFrequency);
}

ExperimentPlan plan() {
  return ExperimentPlan{kJointEfficiency, kDutyCycle, kBinWidth, kCollectionTime};
}

}  // namespace reference

}  // namespace binbell
