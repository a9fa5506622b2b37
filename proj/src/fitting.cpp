#include "binbell/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "binbell/errors.hpp"
#include "binbell/model.hpp"

namespace binbell {

namespace {

struct Weighted {
  double x;
  double y;
  double w;
};

std::vector<Weighted> select_points(std::span<const SeriesPoint> pts, FitWindow window,
                                    bool weighted) {
  std::vector<Weighted> out;
  bool any_in_window = false;
  for (const auto& p : pts) {
    if (!(p.x >= window.lo && p.x <= window.hi) || !std::isfinite(p.y) || !std::isfinite(p.x)) continue;
    any_in_window = true;
    double w = 1.0;
    if (weighted) {
      if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) continue;
      w = 1.0 / (p.sigma * p.sigma);
    }
    out.push_back({p.x, p.y, w});
  }
  if (any_in_window && out.empty()) throw FitError("all weights are zero");
  return out;
}

double model_value(double a, double v, double phi, double omega, double x) {
  return a * (1.0 + v * std::cos(omega * x + phi));
}

FitResult solve(const std::vector<Weighted>& pts, double omega, bool weighted, double grid_step) {
  // Grid scan: cos(omega x + phi) = cos(omega x) cos(phi) - sin(omega x) sin(phi),
  // so every grid phase reduces to a 2x2 solve over precomputed sums.
  double sw = 0, sy = 0, syy = 0, sc = 0, ss = 0, scc = 0, sss = 0, scs = 0, syc = 0, sys = 0;
  for (const auto& p : pts) {
    const double c = std::cos(omega * p.x);
    const double s = std::sin(omega * p.x);
    sw += p.w;
    sy += p.w * p.y;
    syy += p.w * p.y * p.y;
    sc += p.w * c;
    ss += p.w * s;
    scc += p.w * c * c;
    sss += p.w * s * s;
    scs += p.w * c * s;
    syc += p.w * p.y * c;
    sys += p.w * p.y * s;
  }

  double best_chi2 = std::numeric_limits<double>::infinity();
  double best_a = 0, best_b = 0, best_phi = 0;
  const auto steps = static_cast<long>(std::ceil(kTwoPi / grid_step));
  for (long k = 0; k < steps; ++k) {
    const double phi = -kPi + static_cast<double>(k) * grid_step;
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    const double su = cp * sc - sp * ss;
    const double suu = cp * cp * scc - 2.0 * cp * sp * scs + sp * sp * sss;
    const double syu = cp * syc - sp * sys;
    const double det = sw * suu - su * su;
    double a, b;
    if (std::abs(det) <= 1e-14 * sw * std::max(suu, 1e-300)) {
      a = sy / sw;
      b = 0.0;
    } else {
      a = (sy * suu - su * syu) / det;
      b = (sw * syu - su * sy) / det;
    }
    const double chi2 = syy - 2.0 * a * sy - 2.0 * b * syu + a * a * sw + 2.0 * a * b * su + b * b * suu;
    if (chi2 < best_chi2) {
      best_chi2 = chi2;
      best_a = a;
      best_b = b;
      best_phi = phi;
    }
  }
  if (!(std::abs(best_a) > 0.0)) throw FitError("fitted offset is zero; visibility undefined");

  double a = best_a;
  double v = best_b / best_a;
  double phi = best_phi;

  auto normal_equations = [&](Eigen::Matrix3d& jtj, Eigen::Vector3d& jtr, double& chi2) {
    jtj.setZero();
    jtr.setZero();
    chi2 = 0.0;
    for (const auto& p : pts) {
      const double arg = omega * p.x + phi;
      const double c = std::cos(arg);
      const double s = std::sin(arg);
      const Eigen::Vector3d j(1.0 + v * c, a * c, -a * v * s);
      const double r = p.y - a * (1.0 + v * c);
      jtj += p.w * j * j.transpose();
      jtr += p.w * r * j;
      chi2 += p.w * r * r;
    }
  };

  Eigen::Matrix3d jtj;
  Eigen::Vector3d jtr;
  double chi2 = 0.0;
  for (int iter = 0; iter < 20; ++iter) {
    normal_equations(jtj, jtr, chi2);
    Eigen::LDLT<Eigen::Matrix3d> ldlt(jtj);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    const Eigen::Vector3d step = ldlt.solve(jtr);
    if (!step.allFinite()) break;
    // Accept only steps that do not increase chi2.
    const double a0 = a, v0 = v, phi0 = phi;
    a += step[0];
    v += step[1];
    phi += step[2];
    double trial = 0.0;
    for (const auto& p : pts) {
      const double r = p.y - model_value(a, v, phi, omega, p.x);
      trial += p.w * r * r;
    }
    if (trial > chi2) {
      a = a0;
      v = v0;
      phi = phi0;
      break;
    }
    if (step.cwiseAbs().maxCoeff() < 1e-14 * (1.0 + std::abs(a))) break;
  }

  // Sign of v is absorbed into the phase.
  if (v < 0.0) {
    v = -v;
    phi += kPi;
  }
  normal_equations(jtj, jtr, chi2);

  const std::size_t n = pts.size();
  const double dof = static_cast<double>(n > 3 ? n - 3 : 1);
  const double scale = weighted ? 1.0 : chi2 / dof;

  FitResult out;
  out.offset = a;
  out.visibility = v;
  out.phase = wrap_phase(phi);
  out.chi2 = chi2;
  out.reduced_chi2 = chi2 / dof;
  out.points = n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::FullPivLU<Eigen::Matrix3d> lu(jtj);
  if (lu.rank() == 3) {
    cov = lu.inverse() * scale;
  } else {
    // Phase is undetermined when v = 0; keep the (a, v) block.
    const Eigen::Matrix2d block = jtj.topLeftCorner<2, 2>();
    Eigen::FullPivLU<Eigen::Matrix2d> lu2(block);
    if (lu2.rank() == 2) cov.topLeftCorner<2, 2>() = lu2.inverse() * scale;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out.covariance[i][j] = cov(i, j);
  }
  out.supra_physical = out.visibility > 1.0 + 3.0 * out.sigma_visibility();
  return out;
}

}  // namespace

double FitResult::sigma_offset() const { return std::sqrt(covariance[0][0]); }
double FitResult::sigma_visibility() const { return std::sqrt(covariance[1][1]); }
double FitResult::sigma_phase() const { return std::sqrt(covariance[2][2]); }

FitResult fit_beating(std::span<const SeriesPoint> series, double delta, FitWindow window,
                      const FitOptions& options) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw FitError("beat frequency must be positive");
  if (!std::isfinite(window.lo) || !std::isfinite(window.hi) || !(window.hi > window.lo)) {
    throw FitError("beating fit needs a finite window");
  }
  if (window.hi - window.lo > options.max_window * (1.0 + 1e-9)) {
    throw FitError("beating window wider than " + std::to_string(options.max_window * 1e9) + " ns");
  }
  const auto pts = select_points(series, window, options.weighted);
  if (pts.size() < 8) throw FitError("insufficient points: beating fit needs at least 8");
  const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(),
                                            [](const Weighted& a, const Weighted& b) { return a.x < b.x; });
  const double span = hi->x - lo->x;
  const double period = kTwoPi / delta;
  const double spacing = span / static_cast<double>(pts.size() - 1);
  if (span + spacing < period * (1.0 - 1e-9)) {
    throw FitError("insufficient points: window covers less than one beat period");
  }
  FitResult out = solve(pts, delta, options.weighted, options.grid_step);
  out.window = window;
  return out;
}

FitResult fit_phase_fringe(std::span<const SeriesPoint> points, const FitOptions& options) {
  const auto pts = select_points(points, FitWindow{}, options.weighted);
  std::vector<double> phases;
  for (const auto& p : pts) phases.push_back(wrap_phase(p.x));
  std::sort(phases.begin(), phases.end());
  std::size_t distinct = phases.empty() ? 0 : 1;
  for (std::size_t i = 1; i < phases.size(); ++i) {
    if (phases[i] - phases[i - 1] > 1e-9) ++distinct;
  }
  if (distinct >= 2 && phases.back() - phases.front() > kTwoPi - 1e-9) --distinct;
  if (distinct < 5) throw FitError("insufficient points: fringe fit needs at least 5 distinct phases");
  FitResult out = solve(pts, 1.0, options.weighted, options.grid_step);
  if (!pts.empty()) {
    const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(),
                                              [](const Weighted& a, const Weighted& b) { return a.x < b.x; });
    out.window = FitWindow{lo->x, hi->x};
  }
  return out;
}

VisibilityS S_from_visibilities(double v1, double v2, double sigma_v1, double sigma_v2) {
  VisibilityS out;
  out.S = kSqrt2 * (v1 + v2);
  out.sigma = kSqrt2 * std::hypot(sigma_v1, sigma_v2);
  out.sigma_linear = kSqrt2 * (std::abs(sigma_v1) + std::abs(sigma_v2));
  return out;
}

}  // namespace binbell
