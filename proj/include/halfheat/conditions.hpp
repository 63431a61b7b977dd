#pragma once

// Necessary-condition functionals of a measure, tested for divergence as sigma -> 0:
// a functional that grows without bound admits no constant, so the data is obstructed.

#include <optional>
#include <string>
#include <vector>

#include "halfheat/measures.hpp"
#include "halfheat/solver.hpp"

namespace halfheat {

enum class ConditionVerdict { OBSTRUCTED_NONEXISTENCE, UNOBSTRUCTED, INCONCLUSIVE };
std::string to_string(ConditionVerdict v);

enum class ConditionTag { ball, log_interior, log_boundary, boundary_mass, global_growth };
std::string to_string(ConditionTag t);

struct FunctionalSample {
  Point z;
  double sigma = 0.0;
  double value = 0.0;
};

struct ConditionReport {
  ConditionTag which = ConditionTag::ball;
  std::vector<FunctionalSample> samples;
  /// sup over centers of the functional, per sigma (sigma ascending).
  std::vector<double> sigmas;
  std::vector<double> sup_by_sigma;
  double sup_estimate = 0.0;
  /// Fitted growth exponent as sigma -> 0 and its 95% half-width.
  double growth_exponent = 0.0;
  double growth_halfwidth = 0.0;
  ConditionVerdict verdict = ConditionVerdict::INCONCLUSIVE;
  std::string diagnostic;
};

struct SampleGrid {
  std::vector<Point> centers;
  std::vector<double> sigmas;
};

struct ConditionOptions {
  /// Slope magnitude that counts as divergence.
  double slope_tol = 0.1;
  /// Fit residual (rms) above this fraction of the fitted range gives INCONCLUSIVE.
  double residual_fraction = 0.2;
  /// Default sample grids: centers per axis and sigma range [lo, hi] * sqrt(T), ratio 2.
  int per_axis = 9;
  double sigma_lo = 1e-6;
  double sigma_hi = 1e-2;
  /// Functional samples are independent; results do not depend on the thread count.
  int threads = 1;
};

/// Centers from the measure (box grid, atoms, singular centers) and geometric radii.
SampleGrid default_sample_grid(const HalfSpaceMeasure& mu, double T, const ConditionOptions& opts = {});

/// R(z, sigma) = mu(B(z, sigma)) / (sigma^{-2/(p-1)} int_{B(z, sigma)} y_N dy); obstructed when the log-log
/// slope of sup_z R against sigma is <= -slope_tol.
ConditionReport check_ball_condition(const HalfSpaceMeasure& mu, double p, double T,
                                     const std::optional<SampleGrid>& grid = {}, const ConditionOptions& opts = {});

/// L(z, sigma) = z_N^{-1} mu(B(z, sigma)) [log(e + sqrt T / sigma)]^{N/2} for z_N >= 3 sigma (p = p_N);
/// obstructed when sup_z L grows like a positive power of log(1/sigma).
ConditionReport check_log_condition_pN(const HalfSpaceMeasure& mu, double T,
                                       const std::optional<SampleGrid>& grid = {}, const ConditionOptions& opts = {});

/// M(z, sigma) = mu(B(z, sigma)) [log(e + sqrt T / sigma)]^{(N+1)/2} for z on the boundary (p = p_{N+1}).
ConditionReport check_log_condition_pN1(const HalfSpaceMeasure& mu, double T,
                                        const std::optional<SampleGrid>& grid = {}, const ConditionOptions& opts = {});

/// mu(boundary) > 0 with p >= 2 is obstructed.
ConditionReport check_boundary_mass(const HalfSpaceMeasure& mu, double p);

struct GrowthOptions {
  double first_box = 1.0;
  int doublings = 6;
  int per_axis = 17;
  /// Relative increase on the last doubling below which the sup has stabilised.
  double stable_increase = 0.01;
  /// Log-log slope of the running sup against box size that counts as unbounded growth.
  double slope_tol = 0.1;
  int threads = 1;
};

/// Running sup of mu(B(z, 1)) / (1 + z_N) over boxes of doubling size. Requires 1 < p < p_{N+1}, or
/// 1 < p < p_N when supp mu stays away from the boundary.
ConditionReport check_global_growth(const HalfSpaceMeasure& mu, double p, const GrowthOptions& opts = {});

struct ClassifierReport {
  ConditionVerdict verdict = ConditionVerdict::INCONCLUSIVE;
  std::vector<ConditionReport> reports;
};

/// Boundary mass, ball condition and (at the critical exponents) the log conditions.
ClassifierReport classify_measure(const HalfSpaceMeasure& mu, double p, double T, const ConditionOptions& opts = {});

enum class RateKind { interior, boundary };

struct RateSample {
  RateKind kind = RateKind::interior;
  Point x;
  double t = 0.0;
  double value = 0.0;
  /// (T - t)^{N/2 - 1/(p-1)} (interior) or (T - t)^{(N+1)/2 - 1/(p-1)} (boundary).
  double bound = 0.0;
  double ratio = 0.0;
};

/// int_{B(x, sqrt(T-t))} u dy at the slice maximiser lifted to x_N >= sqrt(T-t), and
/// int_{B(x', sqrt(T-t))} y_N u dy at its boundary projection, for the given times (all grid times < T
/// when empty).
std::vector<RateSample> blow_up_rate_functionals(const SolutionField& u, double T,
                                                 const std::vector<double>& times = {});

}  // namespace halfheat
