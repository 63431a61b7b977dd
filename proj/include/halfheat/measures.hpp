#pragma once

// Nonnegative Radon measures on the closed half-space, stored as
//
//   mu = g(x) dx  (or x_N f(x) dx)  +  h(x') dx' on the boundary  +  sum of atoms,
//
// together with the ball functionals consumed by the condition checks and the
// pairing with the boundary kernel K.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "halfheat/kernels.hpp"
#include "halfheat/point.hpp"
#include "halfheat/quadrature.hpp"

namespace halfheat {

/// Radial singularity r^{-radial_exponent} |log r|^{-log_exponent} at `center`.
struct Singularity {
  Coords center{};
  double radial_exponent = 0.0;
  double log_exponent = 0.0;
};

/// Ball outside of which a density vanishes; infinite radius means unbounded support.
struct SupportBall {
  Coords center{};
  double radius = quadrature::kInf;
};

/// A nonnegative density on R^dim (dim = N for interior parts, N-1 for the boundary line).
class Density {
 public:
  using Fn = std::function<double(const Coords&)>;

  Density(int dim, Fn fn, SupportBall support = {}, std::optional<Singularity> singularity = {});

  /// phi(|x - center|) on B(center, support_radius). Quadrature about `center` passes the exact
  /// radius to phi instead of recomputing it from coordinates.
  static Density radial(int dim, const Coords& center, std::function<double(double)> phi, double support_radius,
                        std::optional<Singularity> singularity = {});

  int dim() const { return dim_; }
  double operator()(const Coords& x) const { return fn_(x); }
  const SupportBall& support() const { return support_; }
  const std::optional<Singularity>& singularity() const { return singularity_; }
  bool is_radial() const { return static_cast<bool>(phi_); }
  /// phi(r) for radial densities.
  double radial_value(double r) const { return phi_(r); }
  const Coords& radial_center() const { return support_.center; }

 private:
  int dim_;
  Fn fn_;
  SupportBall support_;
  std::optional<Singularity> singularity_;
  std::function<double(double)> phi_;
};

struct Atom {
  Point location;
  double mass = 0.0;
};

enum class InteriorForm {
  /// d mu = g(x) dx
  plain,
  /// d mu = x_N f(x) dx, f kept
  weighted,
};

class HalfSpaceMeasure {
 public:
  explicit HalfSpaceMeasure(int dim);

  HalfSpaceMeasure with_interior_density(Density g) const;
  HalfSpaceMeasure with_weighted_density(Density f) const;
  HalfSpaceMeasure with_boundary_line(Density h) const;
  HalfSpaceMeasure with_atom(const Point& location, double mass) const;
  HalfSpaceMeasure scaled(double factor) const;

  int dim() const { return dim_; }
  double scale() const { return scale_; }
  bool is_zero() const;

  const std::optional<Density>& interior() const { return interior_; }
  InteriorForm interior_form() const { return form_; }
  const std::optional<Density>& boundary_line() const { return boundary_line_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  /// Density of mu with respect to Lebesgue measure at an interior point (includes scale).
  double density_at(const Coords& x) const;
  /// f(x) for the weighted form (includes scale); throws for the plain form.
  double weighted_factor_at(const Coords& x) const;

  /// Smallest R such that mu is supported in the closed ball B(0, R); +inf if unbounded.
  double support_radius() const;

 private:
  int dim_;
  double scale_ = 1.0;
  InteriorForm form_ = InteriorForm::plain;
  std::optional<Density> interior_;
  std::optional<Density> boundary_line_;
  std::vector<Atom> atoms_;
};

/// mu(B(z, sigma) intersected with the closed half-space).
double ball_mass(const HalfSpaceMeasure& mu, const Point& z, double sigma,
                 const kernels::KernelConfig& cfg = {});

/// Integral of y_N over B(z, sigma) intersected with the half-space.
double half_ball_moment(const Point& z, double sigma);

/// Integral of (y_N + sqrt(s))^{-1} d mu(y) over B(z, sigma) intersected with the closed half-space.
double weighted_ball_integral(const HalfSpaceMeasure& mu, const Point& z, double sigma, double s,
                              const kernels::KernelConfig& cfg = {});

/// Integral of K(x, y, t) d mu(y).
double apply_K(const HalfSpaceMeasure& mu, const Point& x, double t, const kernels::KernelConfig& cfg = {});

/// int Gamma_d(x - y, t) h(y) dy for a density h on R^d, cut at the kernel reach.
double free_heat_semigroup(const Density& h, const Coords& x, double t, const kernels::KernelConfig& cfg = {});

/// mu restricted to the boundary hyperplane: boundary atoms plus total boundary-line mass.
double boundary_mass(const HalfSpaceMeasure& mu, const kernels::KernelConfig& cfg = {});

/// mu(B(z, sigma)) for a whole list of radii (shares nothing; convenience).
std::vector<double> ball_mass_series(const HalfSpaceMeasure& mu, const Point& z, const std::vector<double>& sigmas,
                                     const kernels::KernelConfig& cfg = {});

enum class ProfileKind {
  interior_power,
  interior_log,
  boundary_power,
  boundary_log,
  boundary_line_power,
  boundary_line_log,
};

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& name);

struct SingularProfile {
  ProfileKind kind = ProfileKind::interior_power;
  Point center;
  double p = 2.0;

  int dim() const { return center.dim(); }
  void validate() const;
};

/// kappa times the named optimal-singularity profile.
HalfSpaceMeasure make_profile(const SingularProfile& profile, double kappa);

/// x_N * amplitude * exp(-|x - c|^2 / width^2), cut at 8 widths.
HalfSpaceMeasure gaussian_measure(const Point& center, double width, double amplitude);
/// x_N * amplitude * exp(1 - 1/(1 - |x-c|^2/r^2)) on B(c, r): smooth, compactly supported, peak value amplitude.
HalfSpaceMeasure bump_measure(const Point& center, double radius, double amplitude);
/// Lebesgue density g = value on the ball B(center, radius) (radius may be infinite).
HalfSpaceMeasure constant_measure(int dim, double value, const Point& center = Point{},
                                  double radius = quadrature::kInf);
HalfSpaceMeasure atom_measure(const Point& location, double mass);

}  // namespace halfheat
