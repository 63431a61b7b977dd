#include "halfheat/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace halfheat::kernels {

namespace {

void require_positive_time(double t) {
  if (!(t > 0.0)) throw std::domain_error("heat kernel evaluated at non-positive time");
}

void require_same_dim(const Point& x, const Point& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("points of different dimension");
}

double gamma1(double z, double t) {
  return std::exp(-z * z / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

}  // namespace

void KernelConfig::validate() const {
  if (!(quadrature_tol > 0.0)) throw std::invalid_argument("quadrature_tol must be positive");
  if (!(truncation_radius_sigmas >= 6.0))
    throw std::invalid_argument("truncation_radius_sigmas must be at least 6");
  if (!(small_argument_threshold > 0.0))
    throw std::invalid_argument("small_argument_threshold must be positive");
}

double free_heat_kernel_r2(int d, double r2, double t) {
  require_positive_time(t);
  return std::pow(4.0 * std::numbers::pi * t, -0.5 * d) * std::exp(-r2 / (4.0 * t));
}

double free_heat_kernel(int d, std::span<const double> x, double t) {
  if (d < 1 || static_cast<std::size_t>(d) != x.size())
    throw std::invalid_argument("free_heat_kernel: dimension mismatch");
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return free_heat_kernel_r2(d, r2, t);
}

double dirichlet_kernel_raw(const Coords& x, const Coords& y, int dim, double t) {
  const double xn = x[dim - 1];
  const double yn = y[dim - 1];
  if (xn <= 0.0 || yn <= 0.0) return 0.0;
  const double z = xn * yn / t;
  const double r2 = distance_squared(x, y, dim);
  if (z < 1.0) return free_heat_kernel_r2(dim, r2, t) * -std::expm1(-z);
  double tan2 = r2 - (xn - yn) * (xn - yn);
  if (tan2 < 0.0) tan2 = 0.0;
  const double tang = dim > 1 ? free_heat_kernel_r2(dim - 1, tan2, t) : 1.0;
  return tang * (gamma1(xn - yn, t) - gamma1(xn + yn, t));
}

double dirichlet_kernel_product_form(const Point& x, const Point& y, double t) {
  require_positive_time(t);
  require_same_dim(x, y);
  const double z = x.normal() * y.normal() / t;
  return free_heat_kernel_r2(x.dim(), distance_squared(x.raw(), y.raw(), x.dim()), t) * -std::expm1(-z);
}

double dirichlet_kernel_image_form(const Point& x, const Point& y, double t) {
  require_positive_time(t);
  require_same_dim(x, y);
  const int n = x.dim();
  const double tang = n > 1 ? free_heat_kernel_r2(n - 1, distance_squared(x.raw(), y.raw(), n - 1), t) : 1.0;
  return tang * (gamma1(x.normal() - y.normal(), t) - gamma1(x.normal() + y.normal(), t));
}

double dirichlet_kernel(const Point& x, const Point& y, double t, const KernelConfig& cfg) {
  require_positive_time(t);
  require_same_dim(x, y);
  if (x.on_boundary() || y.on_boundary()) return 0.0;
  const double z = x.normal() * y.normal() / t;
  return z < cfg.small_argument_threshold ? dirichlet_kernel_product_form(x, y, t)
                                          : dirichlet_kernel_image_form(x, y, t);
}

double k_kernel_raw(const Coords& x, const Coords& y, int dim, double t, double branch_threshold) {
  const double xn = x[dim - 1];
  const double yn = y[dim - 1];
  if (xn <= 0.0) return 0.0;
  if (yn <= branch_threshold * std::sqrt(t)) {
    // (x_N/t) Gamma_N(x' - y', x_N, t)
    const double r2 = distance_squared(x, y, dim - 1) + xn * xn;
    return xn / t * free_heat_kernel_r2(dim, r2, t);
  }
  const double r2 = distance_squared(x, y, dim);
  return free_heat_kernel_r2(dim, r2, t) * -std::expm1(-xn * yn / t) / yn;
}

double k_kernel(const Point& x, const Point& y, double t, const KernelConfig& cfg) {
  require_positive_time(t);
  require_same_dim(x, y);
  return k_kernel_raw(x.raw(), y.raw(), x.dim(), t, cfg.boundary_branch_threshold);
}

double dirichlet_kernel_mass(double x_normal, double t) {
  require_positive_time(t);
  if (x_normal < 0.0) throw std::domain_error("dirichlet_kernel_mass: x_N < 0");
  return std::erf(x_normal / (2.0 * std::sqrt(t)));
}

double dirichlet_kernel_mass(const Point& x, double t) { return dirichlet_kernel_mass(x.normal(), t); }

double boundary_k_mass(double t) {
  require_positive_time(t);
  return 1.0 / std::sqrt(std::numbers::pi * t);
}

}  // namespace halfheat::kernels
