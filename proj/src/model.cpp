#include "binbell/model.hpp"

#include <cmath>
#include <string>

#include "binbell/errors.hpp"

namespace binbell {

namespace {

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw DomainError(std::string(what) + " must be finite");
  }
}

}  // namespace

double wrap_phase(double angle) {
  double wrapped = std::remainder(angle, kTwoPi);  // [-pi, pi]
  if (wrapped <= -kPi) wrapped += kTwoPi;
  return wrapped;
}

// Composite Simpson on a fixed panel count; adequate for smooth shapes and
// overridden by shapes with a closed-form area.
double EnvelopeShape::cumulative(double tau) const {
  if (!(tau > 0.0)) return 0.0;
  constexpr int kPanels = 8192;
  const double h = tau / kPanels;
  double sum = value(0.0) + value(tau);
  for (int i = 1; i < kPanels; ++i) {
    sum += value(i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

RiseDecayShape::RiseDecayShape(double rise_time, double decay_time)
    : rise_(rise_time), decay_(decay_time) {
  if (!(decay_ > 0.0) || !std::isfinite(decay_)) {
    throw DomainError("coherence time must be positive");
  }
  if (!(rise_ >= 0.0) || !std::isfinite(rise_)) {
    throw DomainError("rise time must be non-negative");
  }
  combined_ = rise_ > 0.0 ? rise_ * decay_ / (rise_ + decay_) : 0.0;
}

double RiseDecayShape::value(double tau) const {
  if (!(tau > 0.0)) return 0.0;
  const double turn_on = rise_ > 0.0 ? -std::expm1(-tau / rise_) : 1.0;
  return turn_on * std::exp(-tau / decay_);
}

double RiseDecayShape::peak_time() const {
  if (rise_ == 0.0) return 0.0;
  return rise_ * std::log1p(decay_ / rise_);
}

double RiseDecayShape::peak_value() const {
  if (rise_ == 0.0) return 1.0;
  return value(peak_time());
}

double RiseDecayShape::support_end() const { return 23.1 * decay_ + rise_; }

double RiseDecayShape::cumulative(double tau) const {
  if (!(tau > 0.0)) return 0.0;
  double area = -decay_ * std::expm1(-tau / decay_);
  if (combined_ > 0.0) area += combined_ * std::expm1(-tau / combined_);
  return area;
}

WavepacketModel::WavepacketModel(const WavepacketParams& params)
    : WavepacketModel(params, nullptr) {}

WavepacketModel::WavepacketModel(const WavepacketParams& params,
                                 std::shared_ptr<const EnvelopeShape> shape)
    : params_(params), shape_(std::move(shape)) {
  validate();
  if (!shape_) {
    shape_ = std::make_shared<RiseDecayShape>(params_.rise_time, params_.coherence_time);
    default_shape_ = true;
  } else {
    default_shape_ = false;
  }
  const double peak = shape_->peak_value();
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw DomainError("envelope shape must have a positive finite peak");
  }
  amplitude_ = (params_.peak_rate_density - params_.accidental_floor) / peak;
}

void WavepacketModel::validate() const {
  const auto& p = params_;
  require_finite(p.peak_rate_density, "peak rate density");
  require_finite(p.accidental_floor, "accidental floor");
  require_finite(p.coherence_time, "coherence time");
  require_finite(p.rise_time, "rise time");
  require_finite(p.beat_frequency, "beat frequency");
  if (!(p.peak_rate_density > 0.0)) throw DomainError("peak rate density must be positive");
  if (!(p.accidental_floor >= 0.0)) throw DomainError("accidental floor must be non-negative");
  if (p.peak_rate_density < p.accidental_floor) {
    throw DomainError("peak rate density must not lie below the accidental floor");
  }
  if (!(p.coherence_time > 0.0)) throw DomainError("coherence time must be positive");
  if (!(p.rise_time >= 0.0)) throw DomainError("rise time must be non-negative");
  if (!(p.beat_frequency > 0.0)) throw DomainError("beat frequency must be positive");
}

double WavepacketModel::excess_density(double tau) const {
  require_finite(tau, "tau");
  return amplitude_ * shape_->value(tau);
}

double WavepacketModel::rate_density(double tau) const {
  return params_.accidental_floor + excess_density(tau);
}

void ExperimentPlan::validate() const {
  if (!(joint_efficiency > 0.0 && joint_efficiency <= 1.0)) {
    throw DomainError("joint efficiency must lie in (0, 1]");
  }
  if (!(duty_cycle > 0.0 && duty_cycle <= 1.0)) {
    throw DomainError("duty cycle must lie in (0, 1]");
  }
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw DomainError("bin width must be positive");
  if (!(collection_time > 0.0) || !std::isfinite(collection_time)) {
    throw DomainError("collection time must be positive");
  }
}

BellSettings BellSettings::canonical(double phi_s, double phi_as) {
  return BellSettings{phi_s, phi_s - kPi / 2.0, phi_as, phi_as - kPi / 2.0};
}

PhaseSetting BellSettings::setting(std::size_t k) const {
  switch (k) {
    case 0: return {phi_s, phi_as};
    case 1: return {phi_s_prime, phi_as};
    case 2: return {phi_s, phi_as_prime};
    case 3: return {phi_s_prime, phi_as_prime};
    default: throw DomainError("Bell setting index out of range");
  }
}

ChannelPair::ChannelPair(int stokes_sign, int anti_stokes_sign)
    : stokes_(stokes_sign), anti_stokes_(anti_stokes_sign) {
  if ((stokes_ != 1 && stokes_ != -1) || (anti_stokes_ != 1 && anti_stokes_ != -1)) {
    throw DomainError("channel signs must be +1 or -1");
  }
}

ChannelPair ChannelPair::from_index(std::size_t index) {
  if (index > 3) throw DomainError("channel pair index out of range");
  return kAllPairs[index];
}

std::string ChannelPair::label() const {
  return std::string(stokes_ > 0 ? "+" : "-") + (anti_stokes_ > 0 ? "+" : "-");
}

double beat_phase(const WavepacketModel& model, const PhaseSetting& phases, double tau) {
  require_finite(phases.phi_s, "phi_s");
  require_finite(phases.phi_as, "phi_as");
  return model.beat_frequency() * tau + phases.difference();
}

double g2_envelope(const WavepacketModel& model, double tau) {
  require_finite(tau, "tau");
  if (!(model.accidental_floor() > 0.0)) {
    throw DomainError("normalized correlation needs a positive accidental floor");
  }
  return model.rate_density(tau) / model.accidental_floor();
}

double visibility(double g2_0) {
  if (std::isnan(g2_0) || g2_0 < 1.0) {
    throw DomainError("normalized correlation below 1 is unphysical");
  }
  if (std::isinf(g2_0)) return 1.0;
  return (g2_0 - 1.0) / (g2_0 + 1.0);
}

double visibility_at(const WavepacketModel& model, double tau) {
  const double excess = model.excess_density(tau);
  const double denom = excess + 2.0 * model.accidental_floor();
  return denom > 0.0 ? excess / denom : 0.0;
}

double beat_g2(const WavepacketModel& model, ChannelPair pair, const PhaseSetting& phases,
               double tau) {
  const double g0 = g2_envelope(model, tau);
  const double theta = beat_phase(model, phases, tau);
  return 0.5 * (g0 - 1.0) * (1.0 + pair.product() * std::cos(theta)) + 1.0;
}

double beat_rate_density(const WavepacketModel& model, ChannelPair pair,
                         const PhaseSetting& phases, double tau) {
  const double theta = beat_phase(model, phases, tau);
  return 0.5 * model.excess_density(tau) * (1.0 + pair.product() * std::cos(theta)) +
         model.accidental_floor();
}

double expected_coincidences(const WavepacketModel& model, ChannelPair pair,
                             const PhaseSetting& phases, double tau, const ExperimentPlan& plan) {
  return beat_rate_density(model, pair, phases, tau) * plan.exposure();
}

double bell_E_analytic(const WavepacketModel& model, const PhaseSetting& phases, double tau) {
  return visibility_at(model, tau) * std::cos(beat_phase(model, phases, tau));
}

double bell_S_analytic(const WavepacketModel& model, const BellSettings& settings, double tau) {
  double s = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    s += BellSettings::kSigns[k] * bell_E_analytic(model, settings.setting(k), tau);
  }
  return s;
}

double bell_S_closed_form(const WavepacketModel& model, double phi_s, double phi_as, double tau) {
  const double theta = beat_phase(model, {phi_s, phi_as}, tau);
  return kTsirelson * visibility_at(model, tau) * std::cos(theta + kPi / 4.0);
}

}  // namespace binbell
