#pragma once

// The kernel invariant suite: exact identities checked by Cartesian quadrature and pointwise
// invariants checked over random samples.

#include <cstdint>
#include <string>
#include <vector>

namespace halfheat::kernels {

struct CheckRow {
  std::string name;
  std::size_t samples = 0;
  std::size_t failures = 0;
  /// Largest relative error for identities, largest violation for invariants.
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double seconds = 0.0;
};

struct CheckOptions {
  std::uint64_t seed = 20261016;
  std::size_t invariant_samples = 10000;
  std::size_t semigroup_samples = 20;
  std::size_t mass_samples = 100;
  double boundary_mass_tol = 1e-6;
  double semigroup_tol = 1e-4;
  double mass_tol = 1e-8;
};

/// int_Omega K(x, y, t) dx = (pi t)^{-1/2} for y on the boundary, t in {0.01, 0.1, 1, 10}, N in {1, 2}.
CheckRow check_boundary_mass_identity(const CheckOptions& opts = {});
/// int_Omega G(z, x, s) K(x, y, t) dx = K(z, y, t + s) on random samples (every third y on the boundary).
CheckRow check_semigroup_identity(const CheckOptions& opts = {});
/// G(x, y, t) = G(y, x, t).
CheckRow check_symmetry(const CheckOptions& opts = {});
/// G and K vanish for x on the boundary.
CheckRow check_boundary_vanishing(const CheckOptions& opts = {});
/// G, K > 0 for interior x, y within 2 sqrt t of each other.
CheckRow check_positivity(const CheckOptions& opts = {});
/// Gamma_d(x, 2t - s) >= (s / 2t)^{d/2} Gamma_d(x, s) for 0 < s < t.
CheckRow check_time_monotonicity(const CheckOptions& opts = {});
/// int_Omega G(x, y, t) dy = erf(x_N / 2 sqrt t).
CheckRow check_kernel_mass(const CheckOptions& opts = {});

std::vector<CheckRow> run_kernel_checks(const CheckOptions& opts = {});

}  // namespace halfheat::kernels
