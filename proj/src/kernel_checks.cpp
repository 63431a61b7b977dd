#include "halfheat/kernel_checks.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "halfheat/kernels.hpp"

namespace halfheat::kernels {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;

/// Nested adaptive Gauss-Kronrod over [lo, hi] in R^d, each axis split at `split` when inside.
double box_integral(int d, const std::function<double(const Coords&)>& f, const Coords& lo, const Coords& hi,
                    const Coords& split, double tol) {
  Coords x{};
  std::function<double(int)> level = [&](int axis) -> double {
    auto inner = [&](double v) {
      x[axis] = v;
      return axis + 1 == d ? f(x) : level(axis + 1);
    };
    const double a = lo[axis], b = hi[axis], m = split[axis];
    if (m > a && m < b) return GK::integrate(inner, a, m, 25, tol) + GK::integrate(inner, m, b, 25, tol);
    return GK::integrate(inner, a, b, 25, tol);
  };
  return level(0);
}

/// Integral over the half-space of a function concentrated within L of c.
double half_space_integral(int d, const std::function<double(const Coords&)>& f, const Coords& c, double L,
                           double tol) {
  Coords lo{}, hi{};
  for (int i = 0; i + 1 < d; ++i) {
    lo[i] = c[i] - L;
    hi[i] = c[i] + L;
  }
  lo[d - 1] = 0.0;
  hi[d - 1] = c[d - 1] + L;
  return box_integral(d, f, lo, hi, c, tol);
}

Point random_point(std::mt19937_64& rng, int n, double scale, bool boundary = false) {
  std::uniform_real_distribution<double> tan(-scale, scale);
  std::uniform_real_distribution<double> nor(0.0, scale);
  Coords c{};
  for (int i = 0; i + 1 < n; ++i) c[i] = tan(rng);
  c[n - 1] = boundary ? 0.0 : nor(rng);
  return Point(n, c);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void record_error(CheckRow& row, double err) {
  ++row.samples;
  if (!(err <= row.tolerance)) ++row.failures;
  if (!(err <= row.max_error)) row.max_error = err;
}

CheckRow finish(CheckRow row, const Timer& timer) {
  row.pass = row.failures == 0 && row.samples > 0;
  row.seconds = timer.seconds();
  return row;
}

}  // namespace

CheckRow check_boundary_mass_identity(const CheckOptions& opts) {
  const Timer timer;
  CheckRow row{"boundary_mass_identity"};
  row.tolerance = opts.boundary_mass_tol;
  for (int n : {1, 2})
    for (double t : {0.01, 0.1, 1.0, 10.0}) {
      const Point y = Point::origin(n);
      const double q = half_space_integral(
          n, [&](const Coords& x) { return k_kernel(Point(n, x), y, t); }, y.raw(), 14.0 * std::sqrt(t), 1e-12);
      record_error(row, std::abs(q / boundary_k_mass(t) - 1.0));
    }
  return finish(row, timer);
}

CheckRow check_semigroup_identity(const CheckOptions& opts) {
  const Timer timer;
  CheckRow row{"semigroup_identity"};
  row.tolerance = opts.semigroup_tol;
  std::mt19937_64 rng(opts.seed ^ 0x5eedULL);
  for (std::size_t i = 0; i < opts.semigroup_samples; ++i) {
    const int n = 1 + static_cast<int>(i % 2);
    const Point z = random_point(rng, n, 1.5);
    const Point y = random_point(rng, n, 1.5, i % 3 == 0);
    const double t = log_uniform(rng, 0.05, 2.0);
    const double s = log_uniform(rng, 0.05, 2.0);
    const double exact = k_kernel(z, y, t + s);
    const double q = half_space_integral(
        n, [&](const Coords& x) { const Point xp(n, x); return dirichlet_kernel(z, xp, s) * k_kernel(xp, y, t); },
        z.raw(), 12.0 * std::sqrt(s), 1e-10);
    // Tiny reference values are compared on the scale of the kernel peak.
    const double scale = std::max(exact, 1e-6 * free_heat_kernel_r2(n, 0.0, t + s));
    record_error(row, std::abs(q - exact) / scale);
  }
  return finish(row, timer);
}

CheckRow check_symmetry(const CheckOptions& opts) {
  const Timer timer;
  CheckRow row{"symmetry"};
  row.tolerance = 1e-14;
  std::mt19937_64 rng(opts.seed ^ 0x51ULL);
  for (std::size_t i = 0; i < opts.invariant_samples; ++i) {
    const int n = 1 + static_cast<int>(i % 3);
    const Point x = random_point(rng, n, 3.0);
    const Point y = random_point(rng, n, 3.0);
    const double t = log_uniform(rng, 1e-2, 1e1);
    const double scale = free_heat_kernel_r2(n, 0.0, t);
    record_error(row, std::abs(dirichlet_kernel(x, y, t) - dirichlet_kernel(y, x, t)) / scale);
  }
  return finish(row, timer);
}

CheckRow check_boundary_vanishing(const CheckOptions& opts) {
  const Timer timer;
  CheckRow row{"boundary_vanishing"};
  row.tolerance = 0.0;
  std::mt19937_64 rng(opts.seed ^ 0xb0ULL);
  for (std::size_t i = 0; i < opts.invariant_samples; ++i) {
    const int n = 1 + static_cast<int>(i % 3);
    const Point x = random_point(rng, n, 3.0, true);
    const Point y = random_point(rng, n, 3.0, i % 4 == 0);
    const double t = log_uniform(rng, 1e-2, 1e1);
    record_error(row, std::abs(dirichlet_kernel(x, y, t)) + std::abs(k_kernel(x, y, t)));
  }
  return finish(row, timer);
}

CheckRow check_positivity(const CheckOptions& opts) {
  const Timer timer;
  CheckRow row{"positivity"};
  row.tolerance = 0.0;
  std::mt19937_64 rng(opts.seed ^ 0x90ULL);
  for (std::size_t i = 0; i < opts.invariant_samples; ++i) {
    const int n = 1 + static_cast<int>(i % 3);
    const double t = log_uniform(rng, 1e-2, 1e1);
    const Point x = random_point(rng, n, 3.0);
    // y within 2 sqrt t of x keeps the Gaussian far from underflow.
    Coords c = x.raw();
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < n; ++k) c[k] += u(rng) * std::sqrt(t) / std::sqrt(static_cast<double>(n));
    c[n - 1] = std::abs(c[n - 1]);
    const Point y(n, c);
    if (!(x.normal() > 0.0)) continue;
    const bool ok = dirichlet_kernel(x, y, t) > 0.0 || y.normal() == 0.0;
    const bool k_ok = k_kernel(x, y, t) > 0.0;
    record_error(row, ok && k_ok ? 0.0 : 1.0);
  }
  return finish(row, timer);
}

CheckRow check_time_monotonicity(const CheckOptions& opts) {
  const Timer timer;
  CheckRow row{"time_monotonicity"};
  row.tolerance = 1e-13;
  std::mt19937_64 rng(opts.seed ^ 0x7aULL);
  std::uniform_real_distribution<double> frac(1e-3, 0.999);
  for (std::size_t i = 0; i < opts.invariant_samples; ++i) {
    const int d = 1 + static_cast<int>(i % 3);
    const double t = log_uniform(rng, 1e-2, 1e1);
    const double s = t * frac(rng);
    std::uniform_real_distribution<double> r(0.0, 6.0 * std::sqrt(t));
    const double r2 = std::pow(r(rng), 2);
    const double lhs = free_heat_kernel_r2(d, r2, 2.0 * t - s);
    const double rhs = std::pow(s / (2.0 * t), 0.5 * d) * free_heat_kernel_r2(d, r2, s);
    record_error(row, rhs > 0.0 ? std::max(0.0, 1.0 - lhs / rhs) : 0.0);
  }
  return finish(row, timer);
}

CheckRow check_kernel_mass(const CheckOptions& opts) {
  const Timer timer;
  CheckRow row{"kernel_mass"};
  row.tolerance = opts.mass_tol;
  std::mt19937_64 rng(opts.seed ^ 0x3aULL);
  for (std::size_t i = 0; i < opts.mass_samples; ++i) {
    const int n = 1 + static_cast<int>(i % 2);
    const double t = log_uniform(rng, 1e-2, 1e1);
    Point x = random_point(rng, n, 3.0 * std::sqrt(t));
    const double q = half_space_integral(
        n, [&](const Coords& y) { return dirichlet_kernel(x, Point(n, y), t); }, x.raw(), 12.0 * std::sqrt(t), 1e-11);
    const double exact = dirichlet_kernel_mass(x, t);
    record_error(row, exact > 0.0 ? std::abs(q / exact - 1.0) : std::abs(q));
  }
  return finish(row, timer);
}

std::vector<CheckRow> run_kernel_checks(const CheckOptions& opts) {
  return {check_boundary_mass_identity(opts), check_semigroup_identity(opts), check_symmetry(opts),
          check_boundary_vanishing(opts),     check_positivity(opts),         check_time_monotonicity(opts),
          check_kernel_mass(opts)};
}

}  // namespace halfheat::kernels
