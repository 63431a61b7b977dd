#pragma once

// Monotone Picard iteration of u = K mu + int_0^t G(t - s) u(s)^p ds on a Grid,
// kappa-threshold bisection, numerical initial traces and horizon sweeps.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "halfheat/duhamel.hpp"
#include "halfheat/grid.hpp"
#include "halfheat/measures.hpp"

namespace halfheat {

enum class SolveStatus { CONVERGED, ITERATING, DIVERGED };

std::string to_string(SolveStatus s);

struct PicardCaps {
  int max_sweeps = 300;
  /// Divergence once some slice sup exceeds sup_cap times the linear-evolution sup of that slice.
  double sup_cap = 1e12;
  /// Converged once every slice changes by less than tol times its sup.
  double tol = 1e-8;
  /// Consecutive sweeps of accelerating increments that count as blow-up.
  int growth_window = 5;
  /// Multiplies the nonlinear term (0 switches it off).
  double nonlinear_scale = 1.0;

  void validate() const;
};

struct SolutionField {
  std::shared_ptr<const Grid> grid;
  double p = 0.0;
  SliceValues values;
  std::vector<SolveStatus> slice_status;
  SolveStatus status = SolveStatus::ITERATING;
  int iterations = 0;
  /// Global sup over all nodes after each sweep (entry 0 is the linear evolution).
  std::vector<double> sup_history;
  /// Largest slice-wise ratio sup u_k / sup u_0 after each sweep.
  std::vector<double> amplification_history;
  /// Largest relative slice change per sweep.
  std::vector<double> change_history;
  std::size_t monotonicity_violations = 0;
  std::string diagnostic;

  double slice_sup(std::size_t k) const;
  double at(const Point& x, std::size_t k) const;
};

/// apply_K(mu, node, t_k) on every node and time slice.
SliceValues linear_evolution(const HalfSpaceMeasure& mu, const Grid& grid, const kernels::KernelConfig& cfg = {});

/// Picard iteration from u_0 = the given linear evolution, reusing a cached operator.
SolutionField picard_solve(const SliceValues& u0, double p, const DuhamelOperator& op, const PicardCaps& caps = {});
SolutionField picard_solve(const HalfSpaceMeasure& mu, double p, const DuhamelOperator& op,
                           const PicardCaps& caps = {});
SolutionField picard_solve(const HalfSpaceMeasure& mu, double p, const GridSpec& grid, const PicardCaps& caps = {});

/// int_0^{t_k} int G(x, y, t_k - s) u(y, s)^p dy ds for the field u.
double duhamel_integral(const SolutionField& u, const Point& x, std::size_t k, double p, const DuhamelOperator& op);

/// Grid defaults adapted to the data: finest scales, refine centers and support.
GridSpec default_grid(const HalfSpaceMeasure& mu, double T);

struct Verdict {
  double kappa = 0.0;
  SolveStatus status = SolveStatus::ITERATING;
  int sweeps = 0;
  bool refined = false;
};

struct RefinementTrend {
  bool checked = false;
  /// Verdicts of the bracket endpoints (or the bottom kappa) on the refined grid.
  std::optional<SolveStatus> lo_refined;
  std::optional<SolveStatus> hi_refined;
  bool persistent = false;
};

enum class DichotomyOutcome { BRACKET, ALL_DIVERGE, ALL_CONVERGE };
std::string to_string(DichotomyOutcome o);

struct DichotomyResult {
  DichotomyOutcome outcome = DichotomyOutcome::BRACKET;
  double kappa_lo = 0.0;
  double kappa_hi = 0.0;
  double bracket_ratio = 0.0;
  RefinementTrend refinement_trend;
  std::vector<Verdict> evaluations;
  std::size_t spatial_nodes = 0;
  std::size_t time_nodes = 0;
};

struct DichotomyOptions {
  double kappa_min = 1e-3;
  double kappa_max = 1e3;
  double ratio_tol = 2.0;
  bool refine = true;
  PicardCaps caps;
  int threads = 1;
};

/// Bisection in log kappa for the family kappa * mu_unit.
DichotomyResult dichotomy_bisect(const HalfSpaceMeasure& unit, double p, const GridSpec& grid,
                                 const DichotomyOptions& opts = {});
/// Same for a named singular profile; the profile exponent must match p (power kinds
/// strictly above their critical exponent, log kinds at it).
DichotomyResult dichotomy_bisect(const SingularProfile& profile, double p, const GridSpec& grid,
                                 const DichotomyOptions& opts = {});

using TestFunction = std::function<double(const Coords&)>;

struct TraceResult {
  std::vector<double> times;
  std::vector<double> pairings;
  double limit = 0.0;
  bool inconclusive = false;
};

/// int y_N u(y, t) phi(y) dy for node values on a grid (hat interpolant, Gauss-Legendre per cell).
double weighted_pairing(const Grid& grid, const std::vector<double>& values, const TestFunction& phi);

/// Pairings at the given times (matched to grid times) and their linear extrapolation to t = 0.
std::vector<TraceResult> initial_trace(const SolutionField& u, const std::vector<TestFunction>& tests,
                                       const std::vector<double>& extrapolation_times);

struct HorizonResult {
  double T = 0.0;
  SolveStatus status = SolveStatus::ITERATING;
  int sweeps = 0;
  double amplification = 0.0;
};

struct GlobalProbeReport {
  std::vector<HorizonResult> horizons;
  /// Largest horizon with CONVERGED status (0 if none).
  double largest_converged = 0.0;
  /// "converges-at-all-horizons", "diverges-eventually" or "mixed".
  std::string trend;
};

GlobalProbeReport global_existence_probe(const HalfSpaceMeasure& mu, double p, const std::vector<double>& horizons,
                                         const GridSpec& base, const PicardCaps& caps = {}, int threads = 1);

}  // namespace halfheat
