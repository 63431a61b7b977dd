#pragma once

// Adaptive quadrature over intersections of balls (optionally with the closed
// half-space), in polar coordinates about a chosen pole. A pole carrying an
// integrable radial singularity r^{-a} |log r|^{-b} is handled by integrating
// in s = -log r, where both power and logarithmic singularities become
// decaying tails.

#include <functional>
#include <limits>
#include <vector>

#include "halfheat/point.hpp"

namespace halfheat::quadrature {

using Integrand = std::function<double(const Coords&)>;
/// Integrand that also receives the exact distance r from the pole (no cancellation near the pole).
using PolarIntegrand = std::function<double(const Coords&, double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct BallConstraint {
  Coords center{};
  double radius = kInf;
};

struct Region {
  int dim = 1;
  /// Restrict to {last coordinate >= 0}.
  bool half_space = false;
  std::vector<BallConstraint> balls;
};

struct PolarOptions {
  double rel_tol = 1e-9;
  /// The integrand may blow up (integrably) at the pole.
  bool singular_pole = false;
  /// Subinterval budget of each one-dimensional adaptive pass.
  unsigned max_intervals = 200;
};

/// Integral of f over the region, in polar coordinates about `pole`.
/// Returns +inf when a singular pole is detected to be non-integrable.
double integrate_polar(const Region& region, const Coords& pole, const PolarIntegrand& f,
                       const PolarOptions& opts = {});
double integrate_polar(const Region& region, const Coords& pole, const Integrand& f,
                       const PolarOptions& opts = {});

/// Interval of r >= 0 such that pole + r*dir lies in the region; empty if lo >= hi.
struct RayInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(hi > lo); }
};
RayInterval ray_interval(const Region& region, const Coords& pole, const Coords& dir);

/// Globally adaptive Gauss-Kronrod (15 points) on [a, b]: bisects the interval with the largest error
/// estimate until the summed error is below max(abs_tol, rel_tol * |I|) or `max_intervals` is reached.
double integrate_interval(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-10,
                          unsigned max_intervals = 200, double abs_tol = 0.0);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

}  // namespace halfheat::quadrature
