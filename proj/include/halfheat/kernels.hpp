#pragma once

// Closed-form heat kernels on R^d and on the half-space {x_N > 0} with
// zero Dirichlet data:
//
//   Gamma_d(x,t) = (4 pi t)^{-d/2} exp(-|x|^2 / 4t)
//   G(x,y,t)     = Gamma_N(x-y,t) (1 - exp(-x_N y_N / t))
//                = Gamma_{N-1}(x'-y',t) [Gamma_1(x_N-y_N,t) - Gamma_1(x_N+y_N,t)]
//   K(x,y,t)     = G(x,y,t) / y_N,  extended to y_N = 0 by d/dy_N G.
//
// All functions are pure. Gaussian underflow yields 0, never an error.

#include <span>

#include "halfheat/point.hpp"

namespace halfheat::kernels {

struct KernelConfig {
  /// x_N y_N / t below this uses the expm1 product form, above it the image difference.
  double small_argument_threshold = 1.0;
  /// y_N / sqrt(t) below this uses the analytic boundary branch of K.
  double boundary_branch_threshold = 1e-8;
  double quadrature_tol = 1e-10;
  /// Gaussian tail cut, in units of sqrt(t).
  double truncation_radius_sigmas = 10.0;

  void validate() const;
};

double free_heat_kernel(int d, std::span<const double> x, double t);
/// Same as free_heat_kernel but from |x|^2.
double free_heat_kernel_r2(int d, double r2, double t);

double dirichlet_kernel(const Point& x, const Point& y, double t, const KernelConfig& cfg = {});
/// The two algebraic forms of G, exposed for cross-checking.
double dirichlet_kernel_product_form(const Point& x, const Point& y, double t);
double dirichlet_kernel_image_form(const Point& x, const Point& y, double t);

double k_kernel(const Point& x, const Point& y, double t, const KernelConfig& cfg = {});

/// Integral of G(x, ., t) over the half-space: erf(x_N / (2 sqrt t)).
double dirichlet_kernel_mass(const Point& x, double t);
double dirichlet_kernel_mass(double x_normal, double t);

/// Integral of K(., y, t) over the half-space for y on the boundary: (pi t)^{-1/2}.
double boundary_k_mass(double t);

// Raw-coordinate variants used by the quadrature hot paths (no validation).
double dirichlet_kernel_raw(const Coords& x, const Coords& y, int dim, double t);
double k_kernel_raw(const Coords& x, const Coords& y, int dim, double t, double branch_threshold = 1e-8);

}  // namespace halfheat::kernels
