#pragma once

// Discrete Duhamel operator on a Grid:
//
//   I(x, t_k) = int_0^{t_k} int G(x, y, t_k - s) F(y, s) dy ds,
//
// with F piecewise linear in space (hat functions on the grid, zero on x_N = 0 and
// outside the box), piecewise linear in time on [t_{j-1}, t_j] and constant on
// [0, t_0]. Spatial weights are Gauss-Legendre integrals of the exact kernel against
// each hat; in time the semigroup property gives I_k = S(dt_k) I_{k-1} + local part.
// On the local interval the kernel-mass share F(x) * erf(x_N / (2 sqrt(tau))) is
// integrated exactly in tau, the smooth remainder by Gauss-Legendre in sqrt(tau).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "halfheat/grid.hpp"

namespace halfheat {

struct SparseMatrix {
  std::size_t rows = 0;
  std::vector<std::size_t> start{0};
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  void append_row(const std::vector<std::pair<std::uint32_t, double>>& entries);
  std::size_t nonzeros() const { return val.size(); }
};

using WeightRow = std::vector<std::pair<std::uint32_t, double>>;

/// Weights w_m = int G_1(x, y, tau) phi_m(y) dy over the hats of the normal axis (y > 0).
WeightRow normal_weights(const std::vector<double>& nodes, double x, double tau);
/// Weights w_m = int Gamma_1(x - y, tau) phi_m(y) dy over the hats of a tangential axis.
WeightRow tangential_weights(const std::vector<double>& nodes, double x, double tau);

/// Slice-by-slice field values: values[k][node] at time index k.
using SliceValues = std::vector<std::vector<double>>;

/// Piecewise-(multi)linear interpolant of node values at x (zero at x_N = 0 and outside the box).
double interpolate(const Grid& grid, const std::vector<double>& values, const Point& x);

/// int_0^dt erf(a / sqrt(tau)) * (1 - tau / dt) dtau and int_0^dt erf(a / sqrt(tau)) * tau / dt dtau.
std::pair<double, double> erf_time_moments(double a, double dt);

class DuhamelOperator {
 public:
  explicit DuhamelOperator(std::shared_ptr<const Grid> grid, int threads = 1);

  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }

  /// I at every node and time index for the source F.
  SliceValues apply(const SliceValues& F) const;
  /// I(x, t_k) at an arbitrary point, given F and the node values of I from apply().
  double evaluate(const SliceValues& F, const SliceValues& I, const Point& x, std::size_t k) const;

  std::size_t stored_nonzeros() const;

 private:
  struct Factor {
    SparseMatrix normal;
    SparseMatrix tangential;  // unused in N = 1
    double a = 0.0;           // coefficient of F_k
    double b = 0.0;           // coefficient of F_{k-1}
  };
  struct Step {
    double dt = 0.0;
    Factor propagator;
    std::vector<Factor> local;
    std::vector<double> taus;
    std::vector<double> a;
    std::vector<double> b;
    // Exact kernel-mass moments per normal node, and discrete row sums per quadrature node.
    std::vector<double> mass_a;
    std::vector<double> mass_b;
    std::vector<std::vector<double>> rowsum_normal;
    std::vector<std::vector<double>> rowsum_tangential;
    std::vector<std::vector<double>> diag_normal;
    std::vector<std::vector<double>> diag_tangential;
  };

  void add_mass_correction(const Step& s, const std::vector<double>& Fk, const std::vector<double>& Fprev,
                           std::vector<double>& out) const;

  Step build_step(std::size_t k) const;
  void apply_factor(const Factor& f, const std::vector<double>& in, std::vector<double>& out, double scale,
                    std::vector<double>& work) const;
  double evaluate_factor(const std::vector<double>& values, double x_normal, const std::vector<double>& x_tan,
                         double tau) const;

  std::shared_ptr<const Grid> grid_;
  std::vector<Step> steps_;
};

}  // namespace halfheat
