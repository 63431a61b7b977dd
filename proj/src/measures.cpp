#include "halfheat/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "halfheat/errors.hpp"

namespace halfheat {

namespace {

namespace q = quadrature;

constexpr double kExponentTol = 1e-12;
// A singular point this close to the integration ball (in radii) becomes the polar pole.
constexpr double kPoleReach = 1.5;

void require_integrable(double a, double b, int dim) {
  const bool ok = a < dim - kExponentTol || (std::abs(a - dim) <= kExponentTol && b > 1.0);
  if (!ok)
    throw std::domain_error("density singularity r^-" + std::to_string(a) + " |log r|^-" + std::to_string(b) +
                            " is not locally integrable in dimension " + std::to_string(dim));
}

void require_dim(const Density& d, int dim, const char* what) {
  if (d.dim() != dim) throw std::invalid_argument(std::string(what) + ": density has the wrong dimension");
}

double norm(const Coords& a, const Coords& b, int dim) { return std::sqrt(distance_squared(a, b, dim)); }

bool support_misses(const SupportBall& s, const Coords& c, double r, int dim) {
  return std::isfinite(s.radius) && norm(s.center, c, dim) > s.radius + r;
}

/// Integral of w(y) * density(y) over {dim-ball B(c, r)} [intersected with the half-space] and the density support.
double integrate_density(const Density& dens, int dim, bool half_space, const Coords& c, double r,
                         const std::function<double(const Coords&)>& weight, double tol) {
  if (r <= 0.0 || support_misses(dens.support(), c, r, dim)) return 0.0;
  q::Region region{dim, half_space, {{c, r}, {dens.support().center, dens.support().radius}}};
  q::PolarOptions opts;
  opts.rel_tol = tol;
  Coords pole = c;
  if (const auto& s = dens.singularity(); s && norm(s->center, c, dim) <= kPoleReach * r) {
    pole = s->center;
    opts.singular_pole = true;
  }
  if (dens.is_radial() && norm(dens.radial_center(), pole, dim) == 0.0) {
    return q::integrate_polar(
        region, pole, q::PolarIntegrand([&](const Coords& y, double rr) { return weight(y) * dens.radial_value(rr); }),
        opts);
  }
  return q::integrate_polar(region, pole, q::Integrand([&](const Coords& y) { return weight(y) * dens(y); }), opts);
}

double boundary_line_ball(const HalfSpaceMeasure& mu, const Point& z, double sigma, double tol,
                          const std::function<double(const Coords&)>& weight) {
  if (!mu.boundary_line() || z.normal() >= sigma) return 0.0;
  const double rho = std::sqrt(sigma * sigma - z.normal() * z.normal());
  return integrate_density(*mu.boundary_line(), mu.dim() - 1, false, z.raw(), rho, weight, tol);
}

double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string(what) + ": quadrature returned a non-finite value");
  return v;
}

}  // namespace

Density::Density(int dim, Fn fn, SupportBall support, std::optional<Singularity> singularity)
    : dim_(dim), fn_(std::move(fn)), support_(support), singularity_(singularity) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("density dimension must be 1..3");
  if (!fn_) throw std::invalid_argument("density callable is empty");
  if (!(support_.radius > 0.0)) throw std::invalid_argument("support radius must be positive");
  for (int i = dim; i < kMaxDim; ++i) support_.center[i] = 0.0;
}

Density Density::radial(int dim, const Coords& center, std::function<double(double)> phi, double support_radius,
                        std::optional<Singularity> singularity) {
  if (!phi) throw std::invalid_argument("radial profile callable is empty");
  Density d(
      dim, [dim, center, phi](const Coords& x) { return phi(std::sqrt(distance_squared(x, center, dim))); },
      SupportBall{center, support_radius}, singularity);
  d.phi_ = std::move(phi);
  return d;
}

HalfSpaceMeasure::HalfSpaceMeasure(int dim) : dim_(dim) { require_dimension(dim); }

HalfSpaceMeasure HalfSpaceMeasure::with_interior_density(Density g) const {
  require_dim(g, dim_, "with_interior_density");
  if (const auto& s = g.singularity()) require_integrable(s->radial_exponent, s->log_exponent, dim_);
  HalfSpaceMeasure m = *this;
  m.interior_ = std::move(g);
  m.form_ = InteriorForm::plain;
  return m;
}

HalfSpaceMeasure HalfSpaceMeasure::with_weighted_density(Density f) const {
  require_dim(f, dim_, "with_weighted_density");
  if (const auto& s = f.singularity()) {
    // x_N gains one power against a singularity sitting on the boundary.
    const double a = s->center[dim_ - 1] == 0.0 ? s->radial_exponent - 1.0 : s->radial_exponent;
    require_integrable(a, s->log_exponent, dim_);
  }
  HalfSpaceMeasure m = *this;
  m.interior_ = std::move(f);
  m.form_ = InteriorForm::weighted;
  return m;
}

HalfSpaceMeasure HalfSpaceMeasure::with_boundary_line(Density h) const {
  if (dim_ < 2) throw std::invalid_argument("a boundary-line density needs N >= 2; use a boundary atom for N = 1");
  require_dim(h, dim_ - 1, "with_boundary_line");
  if (const auto& s = h.singularity()) require_integrable(s->radial_exponent, s->log_exponent, dim_ - 1);
  HalfSpaceMeasure m = *this;
  m.boundary_line_ = std::move(h);
  return m;
}

HalfSpaceMeasure HalfSpaceMeasure::with_atom(const Point& location, double mass) const {
  if (location.dim() != dim_) throw std::invalid_argument("atom dimension mismatch");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw std::domain_error("atom mass must be positive and finite");
  HalfSpaceMeasure m = *this;
  if (scale_ == 0.0) throw std::logic_error("cannot add an atom to a zero-scaled measure");
  m.atoms_.push_back({location, mass / scale_});
  return m;
}

HalfSpaceMeasure HalfSpaceMeasure::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) throw std::domain_error("scale factor must be finite and >= 0");
  HalfSpaceMeasure m = *this;
  m.scale_ *= factor;
  return m;
}

bool HalfSpaceMeasure::is_zero() const {
  return scale_ == 0.0 || (!interior_ && !boundary_line_ && atoms_.empty());
}

double HalfSpaceMeasure::density_at(const Coords& x) const {
  if (!interior_) return 0.0;
  const double v = (*interior_)(x) * scale_;
  return form_ == InteriorForm::weighted ? x[dim_ - 1] * v : v;
}

double HalfSpaceMeasure::weighted_factor_at(const Coords& x) const {
  if (!interior_) return 0.0;
  if (form_ != InteriorForm::weighted) throw std::logic_error("measure interior is not of the form x_N f");
  return (*interior_)(x) * scale_;
}

double HalfSpaceMeasure::support_radius() const {
  double r = 0.0;
  auto extend = [&](const SupportBall& s, int dim) {
    Coords origin{};
    r = std::max(r, norm(s.center, origin, dim) + s.radius);
  };
  if (interior_) extend(interior_->support(), dim_);
  if (boundary_line_) extend(boundary_line_->support(), dim_ - 1);
  for (const auto& a : atoms_) r = std::max(r, norm(a.location.raw(), Coords{}, dim_));
  return r;
}

double ball_mass(const HalfSpaceMeasure& mu, const Point& z, double sigma, const kernels::KernelConfig& cfg) {
  if (!(sigma > 0.0)) throw std::domain_error("ball_mass: sigma must be positive");
  if (z.dim() != mu.dim()) throw std::invalid_argument("ball_mass: dimension mismatch");
  if (mu.is_zero()) return 0.0;
  const int n = mu.dim();
  double total = 0.0;
  if (const auto& dens = mu.interior()) {
    const bool weighted = mu.interior_form() == InteriorForm::weighted;
    total += integrate_density(*dens, n, true, z.raw(), sigma,
                               [&](const Coords& y) { return weighted ? y[n - 1] : 1.0; }, cfg.quadrature_tol);
  }
  total += boundary_line_ball(mu, z, sigma, cfg.quadrature_tol, [](const Coords&) { return 1.0; });
  for (const auto& a : mu.atoms())
    if (distance(a.location, z) <= sigma * (1.0 + 1e-14)) total += a.mass;
  return finite_or_throw(total * mu.scale(), "ball_mass");
}

std::vector<double> ball_mass_series(const HalfSpaceMeasure& mu, const Point& z, const std::vector<double>& sigmas,
                                     const kernels::KernelConfig& cfg) {
  std::vector<double> out;
  out.reserve(sigmas.size());
  for (double s : sigmas) out.push_back(ball_mass(mu, z, s, cfg));
  return out;
}

double half_ball_moment(const Point& z, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("half_ball_moment: sigma must be positive");
  const int n = z.dim();
  const double zn = z.normal();
  if (zn >= sigma) return zn * q::unit_ball_volume(n) * std::pow(sigma, n);
  // Slice at height y = zn + sigma sin(phi): cross-section is an (N-1)-ball of radius sigma cos(phi).
  const double slice_volume = n > 1 ? q::unit_ball_volume(n - 1) : 1.0;
  const double phi0 = std::asin(std::max(-1.0, -zn / sigma));
  auto integrand = [&](double phi) {
    const double c = std::cos(phi);
    return (zn + sigma * std::sin(phi)) * slice_volume * std::pow(sigma * c, n - 1) * sigma * c;
  };
  return q::integrate_interval(integrand, phi0, std::numbers::pi / 2, 1e-13);
}

double weighted_ball_integral(const HalfSpaceMeasure& mu, const Point& z, double sigma, double s,
                              const kernels::KernelConfig& cfg) {
  if (!(sigma > 0.0) || !(s > 0.0)) throw std::domain_error("weighted_ball_integral: sigma and s must be positive");
  if (z.dim() != mu.dim()) throw std::invalid_argument("weighted_ball_integral: dimension mismatch");
  if (mu.is_zero()) return 0.0;
  const int n = mu.dim();
  const double rs = std::sqrt(s);
  double total = 0.0;
  if (const auto& dens = mu.interior()) {
    const bool weighted = mu.interior_form() == InteriorForm::weighted;
    total += integrate_density(
        *dens, n, true, z.raw(), sigma,
        [&](const Coords& y) { return (weighted ? y[n - 1] : 1.0) / (y[n - 1] + rs); }, cfg.quadrature_tol);
  }
  total += boundary_line_ball(mu, z, sigma, cfg.quadrature_tol, [&](const Coords&) { return 1.0 / rs; });
  for (const auto& a : mu.atoms())
    if (distance(a.location, z) <= sigma * (1.0 + 1e-14)) total += a.mass / (a.location.normal() + rs);
  return finite_or_throw(total * mu.scale(), "weighted_ball_integral");
}

double apply_K(const HalfSpaceMeasure& mu, const Point& x, double t, const kernels::KernelConfig& cfg) {
  if (!(t > 0.0)) throw std::domain_error("apply_K: t must be positive");
  if (x.dim() != mu.dim()) throw std::invalid_argument("apply_K: dimension mismatch");
  if (mu.is_zero() || x.on_boundary()) return 0.0;
  const int n = mu.dim();
  const double reach = cfg.truncation_radius_sigmas * std::sqrt(t);
  const Coords& xr = x.raw();
  double total = 0.0;
  if (const auto& dens = mu.interior()) {
    if (mu.interior_form() == InteriorForm::weighted) {
      total += integrate_density(
          *dens, n, true, xr, reach, [&](const Coords& y) { return kernels::dirichlet_kernel_raw(xr, y, n, t); },
          cfg.quadrature_tol);
    } else {
      total += integrate_density(
          *dens, n, true, xr, reach,
          [&](const Coords& y) { return kernels::k_kernel_raw(xr, y, n, t, cfg.boundary_branch_threshold); },
          cfg.quadrature_tol);
    }
  }
  if (const auto& h = mu.boundary_line()) {
    const double xn = x.normal();
    if (xn < reach) {
      const double rho = std::sqrt(reach * reach - xn * xn);
      const double amp = xn / t * std::exp(-xn * xn / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
      if (amp > 0.0) {
        total += amp * integrate_density(
                           *h, n - 1, false, xr, rho,
                           [&](const Coords& y) { return kernels::free_heat_kernel_r2(n - 1, distance_squared(xr, y, n - 1), t); },
                           cfg.quadrature_tol);
      }
    }
  }
  for (const auto& a : mu.atoms())
    total += a.mass * kernels::k_kernel_raw(xr, a.location.raw(), n, t, cfg.boundary_branch_threshold);
  return finite_or_throw(total * mu.scale(), "apply_K");
}

double free_heat_semigroup(const Density& h, const Coords& x, double t, const kernels::KernelConfig& cfg) {
  if (!(t > 0.0)) throw std::domain_error("free_heat_semigroup: t must be positive");
  const int d = h.dim();
  const double reach = cfg.truncation_radius_sigmas * std::sqrt(t);
  return finite_or_throw(
      integrate_density(
          h, d, false, x, reach,
          [&](const Coords& y) { return kernels::free_heat_kernel_r2(d, distance_squared(x, y, d), t); },
          cfg.quadrature_tol),
      "free_heat_semigroup");
}

double boundary_mass(const HalfSpaceMeasure& mu, const kernels::KernelConfig& cfg) {
  double total = 0.0;
  for (const auto& a : mu.atoms())
    if (a.location.on_boundary()) total += a.mass;
  if (const auto& h = mu.boundary_line()) {
    const auto& s = h->support();
    if (!std::isfinite(s.radius)) throw NumericalError("boundary_mass: boundary-line density has unbounded support");
    total += integrate_density(*h, mu.dim() - 1, false, s.center, s.radius, [](const Coords&) { return 1.0; },
                               cfg.quadrature_tol);
  }
  return finite_or_throw(total * mu.scale(), "boundary_mass");
}

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::interior_power: return "interior_power";
    case ProfileKind::interior_log: return "interior_log";
    case ProfileKind::boundary_power: return "boundary_power";
    case ProfileKind::boundary_log: return "boundary_log";
    case ProfileKind::boundary_line_power: return "boundary_line_power";
    case ProfileKind::boundary_line_log: return "boundary_line_log";
  }
  return "unknown";
}

ProfileKind profile_kind_from_string(const std::string& name) {
  for (auto k : {ProfileKind::interior_power, ProfileKind::interior_log, ProfileKind::boundary_power,
                 ProfileKind::boundary_log, ProfileKind::boundary_line_power, ProfileKind::boundary_line_log})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown profile kind '" + name + "'");
}

void SingularProfile::validate() const {
  if (!(p > 1.0)) throw std::domain_error("profile exponent p must exceed 1");
  const int n = dim();
  const bool interior = kind == ProfileKind::interior_power || kind == ProfileKind::interior_log;
  if (interior && !(center.normal() > 0.0)) throw std::domain_error("interior profile needs center_N > 0");
  if (!interior && !center.on_boundary()) throw std::domain_error("boundary profile needs center_N = 0");
  if ((kind == ProfileKind::boundary_line_power || kind == ProfileKind::boundary_line_log) && n < 2)
    throw std::domain_error("boundary-line profiles need N >= 2");
  auto require_critical = [&](double pc) {
    if (std::abs(p - pc) > 1e-12 * pc)
      throw std::domain_error("log profile of kind " + to_string(kind) + " is only defined at p = " +
                              std::to_string(pc));
  };
  if (kind == ProfileKind::interior_log) require_critical(fujita_exponent(n));
  if (kind == ProfileKind::boundary_log || kind == ProfileKind::boundary_line_log)
    require_critical(fujita_exponent(n + 1));
}

HalfSpaceMeasure make_profile(const SingularProfile& profile, double kappa) {
  profile.validate();
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::domain_error("profile amplitude kappa must be positive");
  const int n = profile.dim();
  const Coords c = profile.center.raw();
  const double p = profile.p;
  const double power = 2.0 / (p - 1.0);

  auto make = [&](int dim, double cutoff, double a, double b) {
    std::optional<Singularity> sing;
    if (a > 0.0) sing = Singularity{c, a, b};
    auto phi = [cutoff, a, b](double r) {
      if (r >= cutoff || r == 0.0) return 0.0;
      double v = std::pow(r, -a);
      if (b != 0.0) v *= std::pow(-std::log(r), -b);
      return v;
    };
    return Density::radial(dim, c, phi, cutoff, sing);
  };

  HalfSpaceMeasure mu(n);
  switch (profile.kind) {
    case ProfileKind::interior_power:
    case ProfileKind::boundary_power:
      mu = mu.with_weighted_density(make(n, 1.0, power, 0.0));
      break;
    case ProfileKind::interior_log:
      mu = mu.with_weighted_density(make(n, 0.5, n, 0.5 * n + 1.0));
      break;
    case ProfileKind::boundary_log:
      mu = mu.with_weighted_density(make(n, 0.5, n + 1, 0.5 * (n + 1) + 1.0));
      break;
    case ProfileKind::boundary_line_power:
      mu = mu.with_boundary_line(make(n - 1, 1.0, power - 2.0, 0.0));
      break;
    case ProfileKind::boundary_line_log:
      mu = mu.with_boundary_line(make(n - 1, 0.5, n - 1, 0.5 * (n + 1) + 1.0));
      break;
  }
  return mu.scaled(kappa);
}

HalfSpaceMeasure gaussian_measure(const Point& center, double width, double amplitude) {
  if (!(width > 0.0) || !(amplitude >= 0.0)) throw std::domain_error("gaussian_measure: bad width or amplitude");
  const int n = center.dim();
  const Coords c = center.raw();
  Density f(
      n, [n, c, width](const Coords& x) { return std::exp(-distance_squared(x, c, n) / (width * width)); },
      SupportBall{c, 8.0 * width});
  return HalfSpaceMeasure(n).with_weighted_density(std::move(f)).scaled(amplitude);
}

HalfSpaceMeasure bump_measure(const Point& center, double radius, double amplitude) {
  if (!(radius > 0.0) || !(amplitude >= 0.0)) throw std::domain_error("bump_measure: bad radius or amplitude");
  const int n = center.dim();
  const Coords c = center.raw();
  Density f(
      n,
      [n, c, radius](const Coords& x) {
        const double rho2 = distance_squared(x, c, n) / (radius * radius);
        return rho2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - rho2)) : 0.0;
      },
      SupportBall{c, radius});
  return HalfSpaceMeasure(n).with_weighted_density(std::move(f)).scaled(amplitude);
}

HalfSpaceMeasure constant_measure(int dim, double value, const Point& center, double radius) {
  if (!(value >= 0.0)) throw std::domain_error("constant_measure: value must be >= 0");
  const Coords c = center.dim() == dim ? center.raw() : Coords{};
  Density g(dim, [](const Coords&) { return 1.0; }, SupportBall{c, radius});
  return HalfSpaceMeasure(dim).with_interior_density(std::move(g)).scaled(value);
}

HalfSpaceMeasure atom_measure(const Point& location, double mass) {
  return HalfSpaceMeasure(location.dim()).with_atom(location, mass);
}

}  // namespace halfheat
