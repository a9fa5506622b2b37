#pragma once

// Closed-form two-photon correlations of the double-path frequency-bin source.
//
// Times are seconds, beat frequency is rad/s, phases are radians. The biphoton
// envelope G0(tau) is the coincidence-rate density before the beam splitters;
// every channel-pair correlation, visibility and Bell prediction derives from
// it together with the accidental floor N0.

#include <array>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>

namespace binbell {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kTsirelson = 2.0 * std::numbers::sqrt2;

/// Wraps an angle to (-pi, pi].
double wrap_phase(double angle);

/// Shape of the true-pair excess G0(tau) - N0, up to a constant factor.
///
/// Implementations must return 0 for tau <= 0 and a non-negative, integrable
/// profile for tau > 0. The model rescales the shape so that its maximum sits
/// at the configured peak rate density.
class EnvelopeShape {
 public:
  virtual ~EnvelopeShape() = default;

  virtual double value(double tau) const = 0;
  virtual double peak_value() const = 0;
  virtual double peak_time() const = 0;
  /// Delay past which the remaining area is below 1e-10 of the total.
  virtual double support_end() const = 0;
  /// Area of value() over [0, tau]. The default integrates numerically.
  virtual double cumulative(double tau) const;
  double total_area() const { return cumulative(support_end()); }
};

/// (1 - exp(-tau/rise)) * exp(-tau/decay) for tau > 0; rise may be zero.
class RiseDecayShape final : public EnvelopeShape {
 public:
  RiseDecayShape(double rise_time, double decay_time);

  double value(double tau) const override;
  double peak_value() const override;
  double peak_time() const override;
  double support_end() const override;
  double cumulative(double tau) const override;

 private:
  double rise_;
  double decay_;
  double combined_;  // rise*decay/(rise+decay), the time constant of the subtracted term
};

struct CarrierLabels {
  std::string stokes = "omega_s";
  std::string anti_stokes = "omega_as";
};

struct WavepacketParams {
  double peak_rate_density = 0.0;  // G0 at the envelope maximum, s^-2
  double coherence_time = 0.0;     // decay constant, s
  double rise_time = 0.0;          // leading-edge turn-on, s
  double accidental_floor = 0.0;   // N0, s^-2
  double beat_frequency = 0.0;     // delta, rad/s
  CarrierLabels carriers;
};

/// Biphoton envelope plus accidental floor and beat frequency.
///
/// Immutable after construction; copies share the envelope shape.
class WavepacketModel {
 public:
  /// Builds the default rise-decay envelope from params.rise_time and coherence_time.
  explicit WavepacketModel(const WavepacketParams& params);
  /// Uses a caller-supplied envelope shape; rise_time/coherence_time become metadata.
  WavepacketModel(const WavepacketParams& params, std::shared_ptr<const EnvelopeShape> shape);

  const WavepacketParams& params() const { return params_; }
  double peak_rate_density() const { return params_.peak_rate_density; }
  double accidental_floor() const { return params_.accidental_floor; }
  double beat_frequency() const { return params_.beat_frequency; }
  double coherence_time() const { return params_.coherence_time; }
  double rise_time() const { return params_.rise_time; }
  const EnvelopeShape& shape() const { return *shape_; }
  std::shared_ptr<const EnvelopeShape> shape_ptr() const { return shape_; }
  bool has_default_shape() const { return default_shape_; }

  /// G0(tau), the rate density before the beam splitters.
  double rate_density(double tau) const;
  /// G0(tau) - N0.
  double excess_density(double tau) const;
  /// Integral of G0 - N0 over all delays, s^-1.
  double excess_area() const { return amplitude_ * shape_->total_area(); }
  /// Scale factor applied to the shape, s^-2.
  double amplitude() const { return amplitude_; }

 private:
  void validate() const;

  WavepacketParams params_;
  std::shared_ptr<const EnvelopeShape> shape_;
  double amplitude_ = 0.0;
  bool default_shape_ = true;
};

struct PhaseSetting {
  double phi_s = 0.0;
  double phi_as = 0.0;

  double difference() const { return phi_s - phi_as; }
  friend bool operator==(const PhaseSetting&, const PhaseSetting&) = default;
};

/// The four-setting CHSH plan. Setting k of the sum
/// S = E(a,b) - E(a',b) + E(a,b') + E(a',b') is returned by setting(k).
struct BellSettings {
  double phi_s = 0.0;
  double phi_s_prime = 0.0;
  double phi_as = 0.0;
  double phi_as_prime = 0.0;

  /// Primed settings shifted by -pi/2 from the unprimed ones.
  static BellSettings canonical(double phi_s, double phi_as);

  PhaseSetting setting(std::size_t k) const;
  static constexpr std::array<double, 4> kSigns{1.0, -1.0, 1.0, 1.0};
  friend bool operator==(const BellSettings&, const BellSettings&) = default;
};

struct ExperimentPlan {
  double joint_efficiency = 1.0;  // eta
  double duty_cycle = 1.0;        // xi
  double bin_width = 1e-9;        // s
  double collection_time = 1.0;   // T, s

  void validate() const;
  /// eta * xi * bin_width * T, the rate-density to counts conversion.
  double exposure() const { return joint_efficiency * duty_cycle * bin_width * collection_time; }
};

/// Detector pair (D_sX, D_asY).
class ChannelPair {
 public:
  constexpr ChannelPair() = default;
  ChannelPair(int stokes_sign, int anti_stokes_sign);

  int stokes_sign() const { return stokes_; }
  int anti_stokes_sign() const { return anti_stokes_; }
  int product() const { return stokes_ * anti_stokes_; }
  /// 0..3 in the order ++, +-, -+, --.
  std::size_t index() const { return (stokes_ > 0 ? 0 : 2) + (anti_stokes_ > 0 ? 0 : 1); }
  static ChannelPair from_index(std::size_t index);
  std::string label() const;

  friend bool operator==(ChannelPair, ChannelPair) = default;

 private:
  int stokes_ = 1;
  int anti_stokes_ = 1;
};

inline const std::array<ChannelPair, 4> kAllPairs{ChannelPair(1, 1), ChannelPair(1, -1),
                                                  ChannelPair(-1, 1), ChannelPair(-1, -1)};

/// Beat phase delta*tau + phi_s - phi_as.
double beat_phase(const WavepacketModel& model, const PhaseSetting& phases, double tau);

/// g0(tau) = G0(tau)/N0. Requires N0 > 0.
double g2_envelope(const WavepacketModel& model, double tau);

/// (g - 1)/(g + 1).
double visibility(double g2_0);

/// Beating visibility at tau computed from G0 directly, so N0 = 0 gives 1.
double visibility_at(const WavepacketModel& model, double tau);

/// Normalized correlation g_XY(tau) between D_sX and D_asY.
double beat_g2(const WavepacketModel& model, ChannelPair pair, const PhaseSetting& phases,
               double tau);

/// Rate density G_XY(tau), s^-2.
double beat_rate_density(const WavepacketModel& model, ChannelPair pair,
                         const PhaseSetting& phases, double tau);

/// Expected counts in one bin at tau: G_XY(tau) * eta * xi * bin_width * T.
double expected_coincidences(const WavepacketModel& model, ChannelPair pair,
                             const PhaseSetting& phases, double tau, const ExperimentPlan& plan);

/// V(tau) cos(delta tau + phi_s - phi_as).
double bell_E_analytic(const WavepacketModel& model, const PhaseSetting& phases, double tau);

/// Four-term CHSH combination of bell_E_analytic.
double bell_S_analytic(const WavepacketModel& model, const BellSettings& settings, double tau);

/// 2 sqrt(2) V(tau) cos(delta tau + phi_s - phi_as + pi/4), valid for canonical settings.
double bell_S_closed_form(const WavepacketModel& model, double phi_s, double phi_as, double tau);

}  // namespace binbell
