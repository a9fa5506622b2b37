#pragma once

#include <optional>

#include "binbell/model.hpp"

namespace binbell {

struct VisibilityPoint {
  double tau = 0.0;
  double visibility = 0.0;
};

struct RiseDecayCalibration {
  double coherence_time = 0.0;
  double rise_time = 0.0;
  double excess_ratio = 0.0;  // A/N0, the shape amplitude in units of the floor
  double peak_g2 = 0.0;       // g0 at the envelope maximum
};

/// Solves for the decay constant and amplitude of the rise-decay envelope so
/// that the visibility passes through both points. The rise time is held fixed.
RiseDecayCalibration calibrate_rise_decay(VisibilityPoint early, VisibilityPoint late,
                                          double rise_time);

WavepacketModel make_rise_decay_model(const RiseDecayCalibration& calibration,
                                      double accidental_floor, double beat_frequency);

struct DelayInterval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Contiguous delay interval containing the envelope peak on which V(tau) > threshold.
/// Edges are located to `tolerance` by bisection. Empty when the peak visibility
/// does not exceed the threshold.
std::optional<DelayInterval> visibility_above(const WavepacketModel& model, double threshold,
                                              double tolerance = 1e-13);

namespace reference {

inline constexpr double kBeatFrequency = kTwoPi * 10e6;  // 2 pi x 10 MHz
inline constexpr double kRiseTime = 2e-9;

// V(252 ns) is fixed at 0.78; V(52 ns) follows from S(52 ns) = -2.52 and the
// closed form 2 sqrt(2) V cos(2 pi * 0.52).
inline constexpr VisibilityPoint kLateVisibility{252e-9, 0.78};
inline constexpr VisibilityPoint kEarlyVisibility{52e-9, 0.898};

inline constexpr double kAccidentalFloor = 1.5e8;  // s^-2
inline constexpr double kJointEfficiency = 0.2;
inline constexpr double kDutyCycle = 0.1;
inline constexpr double kBinWidth = 1e-9;
// Collection time giving sigma_S of roughly 0.48 at tau = 52 ns with 1 ns bins.
inline constexpr double kCollectionTime = 90.0;
inline constexpr double kWindowPeriod = 10e-6;

/// Bell phases of the S(tau) measurement: phi_s = 0, phi_as = pi/4 and the
/// canonical primed pair -pi/2, -pi/4.
BellSettings bell_settings();

RiseDecayCalibration calibration();
WavepacketModel model();
ExperimentPlan plan();

}  // namespace reference

}  // namespace binbell
