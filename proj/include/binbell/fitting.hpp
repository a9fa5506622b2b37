#pragma once

// Fixed-frequency sinusoid fits, y(x) = a [1 + v cos(omega x + phi0)].
//
// The frequency is never fitted. For each phase on a 1 mrad grid the model is
// linear in (a, a v) and solved exactly; the best grid point is then polished
// with Gauss-Newton on (a, v, phi0) and the covariance is taken from the
// Jacobian at the optimum.

#include <array>
#include <limits>
#include <span>
#include <vector>

namespace binbell {

struct SeriesPoint {
  double x = 0.0;
  double y = 0.0;
  double sigma = 1.0;
};

struct FitWindow {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct FitOptions {
  /// Use 1/sigma^2 weights; otherwise equal weights with sigma estimated from residuals.
  bool weighted = true;
  /// Widest accepted beating window, seconds.
  double max_window = 200e-9;
  double grid_step = 1e-3;
};

struct FitResult {
  double offset = 0.0;
  double visibility = 0.0;
  double phase = 0.0;  // (-pi, pi]
  std::array<std::array<double, 3>, 3> covariance{};  // order: offset, visibility, phase
  double chi2 = 0.0;
  double reduced_chi2 = 0.0;
  std::size_t points = 0;
  FitWindow window;
  /// v > 1 + 3 sigma_v.
  bool supra_physical = false;

  double sigma_offset() const;
  double sigma_visibility() const;
  double sigma_phase() const;
};

/// Beating fit over tau in seconds; delta in rad/s. Needs >= 8 points covering
/// one beat period inside a window no wider than options.max_window.
FitResult fit_beating(std::span<const SeriesPoint> series, double delta, FitWindow window,
                      const FitOptions& options = {});

/// Fringe fit over phi_s in radians, C(phi_s) = a [1 + v cos(phi_s + phi0)]
/// with phi0 = delta tau - phi_as. Needs >= 5 distinct phases.
FitResult fit_phase_fringe(std::span<const SeriesPoint> points, const FitOptions& options = {});

struct VisibilityS {
  double S = 0.0;
  double sigma = 0.0;         // independent errors, added in quadrature
  double sigma_linear = 0.0;  // fully correlated errors, added linearly
};

/// S = sqrt(2) (v1 + v2).
VisibilityS S_from_visibilities(double v1, double v2, double sigma_v1, double sigma_v2);

}  // namespace binbell
