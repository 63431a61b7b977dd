#include "halfheat/supersolutions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "halfheat/errors.hpp"
#include "halfheat/sampling.hpp"
#include "halfheat/solver.hpp"

namespace halfheat {

namespace {

constexpr double kTolMargin = 1e-3;

/// mu = x_N f + h on the boundary, with the measure scale folded into f and h.
struct Split {
  std::optional<Density> f;
  std::optional<Density> h;
  /// N = 1: total mass of the boundary atoms (the boundary is a single point).
  double h_point = 0.0;
  bool has_h() const { return h.has_value() || h_point > 0.0; }
};

Split split_measure(const HalfSpaceMeasure& mu, const char* what) {
  Split s;
  if (mu.is_zero()) return s;
  const int n = mu.dim();
  const double scale = mu.scale();
  auto scaled = [scale](const Density& d) {
    if (scale == 1.0) return d;
    if (d.is_radial())
      return Density::radial(d.dim(), d.radial_center(), [d, scale](double r) { return scale * d.radial_value(r); },
                             d.support().radius, d.singularity());
    return Density(d.dim(), [d, scale](const Coords& x) { return scale * d(x); }, d.support(), d.singularity());
  };
  if (const auto& d = mu.interior()) {
    if (mu.interior_form() != InteriorForm::weighted)
      throw std::domain_error(std::string(what) + ": interior part must be of the form x_N f");
    s.f = scaled(*d);
  }
  if (const auto& h = mu.boundary_line()) s.h = scaled(*h);
  for (const auto& a : mu.atoms()) {
    if (n != 1 || !a.location.on_boundary())
      throw std::domain_error(std::string(what) + ": atoms are only accepted on the boundary in N = 1");
    s.h_point += a.mass * scale;
  }
  return s;
}

/// g(d(x)) with the support and (optionally replaced) singularity hint of d; needs g(0) = 0.
Density transform_density(const Density& d, const std::function<double(double)>& g,
                          std::optional<Singularity> sing) {
  if (d.is_radial())
    return Density::radial(d.dim(), d.radial_center(), [d, g](double r) { return g(d.radial_value(r)); },
                           d.support().radius, sing);
  return Density(d.dim(), [d, g](const Coords& x) { return g(d(x)); }, d.support(), sing);
}

/// Singularity of Phi(c f) for the singularity r^-a |log r|^-b of f.
std::optional<Singularity> gauge_singularity(const Density& d, const ConvexGauge& gauge) {
  auto s = d.singularity();
  if (!s) return s;
  switch (gauge.kind()) {
    case GaugeKind::identity: break;
    case GaugeKind::power:
      s->radial_exponent *= gauge.alpha();
      s->log_exponent *= gauge.alpha();
      break;
    case GaugeKind::log_type:
    case GaugeKind::shifted_log:
      if (s->radial_exponent > 0.0) s->log_exponent -= gauge.beta();
      break;
  }
  return s;
}

Density gauge_density(const Density& d, const ConvexGauge& gauge, double c = 1.0) {
  return transform_density(d, [gauge, c](double v) { return gauge(c * v); }, gauge_singularity(d, gauge));
}

double gamma1(double x, double t) { return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t); }

/// int_a^b s^q g(s) ds for g linear between g_a and g_b.
double linear_moment(double a, double b, double ga, double gb, double q) {
  auto mom = [&](double e) { return (std::pow(b, e) - std::pow(a, e)) / e; };
  const double m0 = mom(q + 1.0);
  const double m1 = mom(q + 2.0);
  return ga * m0 + (gb - ga) / (b - a) * (m1 - a * m0);
}

/// sup_k B * int_0^{t_k} s^q sup A ds with both sups given per time.
std::vector<double> bracket_products(const std::vector<double>& t, const std::vector<double>& bsup,
                                     const std::vector<double>& asup, double q) {
  std::vector<double> out(t.size(), 0.0);
  double J = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k == 0)
      J = asup[0] * std::pow(t[0], q + 1.0) / (q + 1.0);
    else
      J += linear_moment(t[k - 1], t[k], asup[k - 1], asup[k], q);
    out[k] = bsup[k] * J;
  }
  return out;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

void finish_profile(SigmaProfile& prof) {
  prof.sup = 0.0;
  bool positive = true;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < prof.sigmas.size(); ++i) {
    prof.sup = std::max(prof.sup, prof.ratios[i]);
    if (!(prof.ratios[i] > 0.0)) positive = false;
    else {
      lx.push_back(std::log(prof.sigmas[i]));
      ly.push_back(std::log(prof.ratios[i]));
    }
  }
  prof.slope = positive ? least_squares_slope(lx, ly) : 0.0;
}

std::vector<Point> boundary_centers(const std::vector<Point>& centers) {
  std::vector<Point> out;
  for (const auto& c : centers) {
    Coords r = c.raw();
    r[c.dim() - 1] = 0.0;
    Point b(c.dim(), r);
    bool seen = false;
    for (const auto& o : out)
      if (o.raw() == b.raw()) seen = true;
    if (!seen) out.push_back(b);
  }
  return out;
}

void require_sigma_args(double p, double T) {
  if (!(p > 1.0)) throw std::domain_error("smallness functional needs p > 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::domain_error("smallness functional needs T > 0");
}

void require_critical(double p, double pc, const char* what) {
  if (std::abs(p - pc) > 1e-12 * pc) {
    std::ostringstream os;
    os << what << ": p = " << p << " must equal the critical exponent " << pc;
    throw std::domain_error(os.str());
  }
}

SigmaProfile sigma_profile(const std::vector<double>& sigmas, const std::function<double(double)>& value) {
  SigmaProfile prof;
  prof.sigmas = sigmas;
  for (double s : sigmas) prof.ratios.push_back(value(s));
  finish_profile(prof);
  return prof;
}

std::vector<double> sigma_range(double T, const SmallnessOptions& opts) {
  if (!(opts.sigma_min_ratio > 0.0) || !(opts.sigma_min_ratio < 1.0))
    throw std::domain_error("sigma_min_ratio must lie in (0, 1)");
  const double rt = std::sqrt(T);
  return geometric_radii(rt * opts.sigma_min_ratio, rt, 2.0);
}

}  // namespace

PhiSupersolution::PhiSupersolution(const HalfSpaceMeasure& mu, const ConvexGauge& gauge, double p)
    : gauge_(gauge), p_(p), dim_(mu.dim()), gauge_interior_(mu.dim()) {
  if (!(p > 1.0)) throw std::domain_error("build_phi_supersolution: p must exceed 1");
  const Split s = split_measure(mu, "build_phi_supersolution");
  if (s.has_h() && p >= 2.0)
    throw std::domain_error("build_phi_supersolution: the boundary part must vanish when p >= 2");
  if (s.f) {
    gauge_interior_ = gauge_interior_.with_weighted_density(gauge_density(*s.f, gauge));
    has_interior_ = true;
  }
  if (s.h) {
    gauge_line_ = gauge_density(*s.h, gauge);
    has_boundary_ = true;
  }
  if (s.h_point > 0.0) {
    line_constant_ = gauge(s.h_point);
    has_boundary_ = true;
  }
}

double PhiSupersolution::interior_heat(const Point& x, double t) const {
  return has_interior_ ? apply_K(gauge_interior_, x, t) : 0.0;
}

double PhiSupersolution::boundary_heat(const Coords& x, double t) const {
  if (!has_boundary_) return 0.0;
  if (dim_ == 1) return line_constant_;
  return free_heat_semigroup(*gauge_line_, x, t);
}

double PhiSupersolution::v(const Point& x, double t) const {
  if (!has_interior_) return 0.0;
  return 2.0 * gauge_.inverse(interior_heat(x, t));
}

double PhiSupersolution::w(const Point& x, double t) const {
  if (!has_boundary_ || x.on_boundary()) return 0.0;
  const double xn = x.normal();
  const double amp = xn / t * gamma1(xn, t);
  if (amp == 0.0) return 0.0;
  return 2.0 * amp * gauge_.inverse(boundary_heat(x.raw(), t));
}

FieldEvaluator PhiSupersolution::evaluator() const {
  return [self = *this](const Point& x, double t) { return self(x, t); };
}

PhiSupersolution build_phi_supersolution(const HalfSpaceMeasure& mu, const ConvexGauge& gauge, double p) {
  return PhiSupersolution(mu, gauge, p);
}

GaugeThresholdReport gauge_threshold_conditions(const PhiSupersolution& cand, const Grid& grid) {
  if (grid.dim() != cand.dim()) throw std::invalid_argument("gauge_threshold_conditions: dimension mismatch");
  const double p = cand.p();
  const ConvexGauge& g = cand.gauge();
  GaugeThresholdReport r;
  r.times = grid.times();
  r.interior_threshold = std::pow(2.0, -2.0 * p + 1.0);
  r.boundary_threshold = r.interior_threshold * std::pow(2.0 * std::numbers::e * std::numbers::pi, 0.5 * (p - 1.0));
  const std::size_t K = r.times.size();
  r.interior_products.assign(K, 0.0);
  r.boundary_products.assign(K, 0.0);

  if (cand.has_interior()) {
    const SliceValues z = linear_evolution(cand.gauge_interior(), grid);
    std::vector<double> bsup(K, 0.0), asup(K, 0.0);
    for (std::size_t k = 0; k < K; ++k)
      for (double v : z[k]) {
        bsup[k] = std::max(bsup[k], g.B(v));
        asup[k] = std::max(asup[k], g.A(v, p));
      }
    r.interior_products = bracket_products(r.times, bsup, asup, 0.0);
  }
  if (cand.has_boundary()) {
    if (!(p < 2.0)) throw std::domain_error("gauge_threshold_conditions: boundary part needs p < 2");
    std::vector<Coords> xs;
    if (grid.dim() == 1) xs.push_back(Coords{});
    else {
      const auto& tan = grid.tangential();
      for (double a : tan) {
        if (grid.dim() == 2) xs.push_back(Coords{a, 0.0, 0.0});
        else
          for (double b : tan) xs.push_back(Coords{a, b, 0.0});
      }
    }
    std::vector<double> bsup(K, 0.0), asup(K, 0.0);
    for (std::size_t k = 0; k < K; ++k)
      for (const auto& x : xs) {
        const double v = cand.boundary_heat(x, r.times[k]);
        bsup[k] = std::max(bsup[k], g.B(v));
        asup[k] = std::max(asup[k], g.A(v, p));
      }
    r.boundary_products = bracket_products(r.times, bsup, asup, 1.0 - p);
  }
  for (std::size_t k = 0; k < K; ++k) {
    r.interior_lhs = std::max(r.interior_lhs, r.interior_products[k]);
    r.boundary_lhs = std::max(r.boundary_lhs, r.boundary_products[k]);
  }
  r.interior_pass = r.interior_lhs <= r.interior_threshold;
  r.boundary_pass = r.boundary_lhs <= r.boundary_threshold;
  return r;
}

GaugeThresholdReport gauge_threshold_conditions(const HalfSpaceMeasure& mu, const ConvexGauge& gauge, double p, double T) {
  const PhiSupersolution cand(mu, gauge, p);
  const Grid grid(default_grid(mu, T));
  return gauge_threshold_conditions(cand, grid);
}

SliceValues sample_field(const FieldEvaluator& f, const Grid& grid) {
  const std::size_t n = grid.nodes_per_slice();
  SliceValues out(grid.times().size(), std::vector<double>(n, 0.0));
  std::vector<Point> nodes;
  nodes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(grid.node(i));
  for (std::size_t k = 0; k < out.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) out[k][i] = f(nodes[i], grid.times()[k]);
  return out;
}

VerificationReport verify_supersolution(const SliceValues& cand, const SliceValues& linear, double p,
                                        const DuhamelOperator& op) {
  if (!(p >= 1.0)) throw std::domain_error("verify_supersolution: p must be >= 1");
  const Grid& grid = op.grid();
  const std::size_t K = grid.times().size();
  const std::size_t n = grid.nodes_per_slice();
  if (cand.size() != K || linear.size() != K) throw std::invalid_argument("verify_supersolution: wrong slice count");
  VerificationReport r;
  r.nodes = K * n;
  SliceValues F(K, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    if (cand[k].size() != n || linear[k].size() != n)
      throw std::invalid_argument("verify_supersolution: wrong slice size");
    for (std::size_t i = 0; i < n; ++i) {
      const double c = cand[k][i];
      if (!std::isfinite(c)) throw std::domain_error("verify_supersolution: candidate is not finite on the grid");
      r.candidate_sup = std::max(r.candidate_sup, c);
      F[k][i] = std::pow(std::max(c, 0.0), p);
    }
  }
  r.tol_margin = kTolMargin * r.candidate_sup;
  const SliceValues I = op.apply(F);
  std::size_t below = 0;
  bool finite = true;
  r.min_defect = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      const double d = cand[k][i] - linear[k][i] - I[k][i];
      if (!std::isfinite(d)) {
        finite = false;
        continue;
      }
      if (d < r.min_defect) {
        r.min_defect = d;
        r.min_slice = k;
        r.min_node = i;
      }
      if (d < -r.tol_margin) ++below;
    }
  r.fraction_below = static_cast<double>(below) / static_cast<double>(r.nodes);
  std::ostringstream os;
  if (!finite) {
    r.pass = false;
    os << "Duhamel integral of candidate^p is not finite on the grid";
  } else {
    r.pass = below == 0;
    os << (r.pass ? "supersolution inequality holds" : "supersolution inequality fails") << " on " << r.nodes
       << " nodes (min defect " << r.min_defect << " at t=" << grid.times()[r.min_slice] << ", margin "
       << r.tol_margin << ")";
  }
  r.diagnostic = os.str();
  return r;
}

VerificationReport verify_supersolution(const FieldEvaluator& candidate, const HalfSpaceMeasure& mu, double p,
                                        const DuhamelOperator& op) {
  return verify_supersolution(sample_field(candidate, op.grid()), linear_evolution(mu, op.grid()), p, op);
}

BallSmallnessResult ball_integral_smallness(const HalfSpaceMeasure& mu, double p, double T, const SmallnessOptions& opts) {
  require_sigma_args(p, T);
  if (!(opts.s_min_ratio > 0.0) || !(opts.s_min_ratio < 1.0) || opts.per_decade < 1)
    throw std::domain_error("ball_integral_smallness: bad s sampling options");
  BallSmallnessResult r;
  const int n = mu.dim();
  const int count = static_cast<int>(std::ceil(-std::log10(opts.s_min_ratio) * opts.per_decade)) + 1;
  r.s = log_sample(T * opts.s_min_ratio, T, count);
  r.integrand.assign(r.s.size(), 0.0);
  if (mu.is_zero()) return r;
  const auto centers = sample_centers(mu, opts.per_axis, opts.box);
  for (std::size_t j = 0; j < r.s.size(); ++j) {
    const double s = r.s[j];
    double w = 0.0;
    for (const auto& z : centers) w = std::max(w, weighted_ball_integral(mu, z, std::sqrt(s), s));
    r.integrand[j] = std::pow(s, -0.5 * n * (p - 1.0)) * std::pow(w, p - 1.0);
  }

  std::vector<double> lx, ly;
  bool positive = true;
  for (std::size_t j = 0; j < r.s.size() && r.s[j] <= r.s.front() * 100.0 * (1.0 + 1e-9); ++j) {
    if (!(r.integrand[j] > 0.0)) positive = false;
    else {
      lx.push_back(std::log(r.s[j]));
      ly.push_back(std::log(r.integrand[j]));
    }
  }
  r.small_s_slope = positive ? least_squares_slope(lx, ly) : 0.0;
  if (r.small_s_slope <= -1.0 + 2e-2) {
    r.infinite = true;
    r.value = std::numeric_limits<double>::infinity();
    return r;
  }

  // Piecewise power-law product integration; the tail [0, s_0] follows the fitted slope.
  double total = r.integrand.front() * r.s.front() / (1.0 + r.small_s_slope);
  for (std::size_t j = 1; j < r.s.size(); ++j) {
    const double a = r.s[j - 1], b = r.s[j];
    const double ga = r.integrand[j - 1], gb = r.integrand[j];
    if (ga > 0.0 && gb > 0.0) {
      const double m = std::log(gb / ga) / std::log(b / a);
      total += std::abs(m + 1.0) < 1e-12 ? ga * a * std::log(b / a) : ga * a / (m + 1.0) * (std::pow(b / a, m + 1.0) - 1.0);
    } else {
      total += 0.5 * (ga + gb) * (b - a);
    }
  }
  if (!std::isfinite(total)) throw NumericalError("ball_integral_smallness: integral is not finite");
  r.value = total;
  return r;
}

std::pair<SigmaProfile, SigmaProfile> power_gauge_smallness(const HalfSpaceMeasure& mu, double alpha, double p, double T,
                                                      const SmallnessOptions& opts) {
  require_sigma_args(p, T);
  if (!(alpha > 1.0)) throw std::domain_error("power_gauge_smallness: alpha must exceed 1");
  const int n = mu.dim();
  const Split s = split_measure(mu, "power_gauge_smallness");
  const auto sigmas = sigma_range(T, opts);
  const auto centers = sample_centers(mu, opts.per_axis, opts.box);
  const ConvexGauge pw = ConvexGauge::power(alpha);

  std::optional<HalfSpaceMeasure> fa;
  if (s.f) fa = HalfSpaceMeasure(n).with_weighted_density(gauge_density(*s.f, pw));
  const double e_int = n - 2.0 * alpha / (p - 1.0);
  SigmaProfile interior = sigma_profile(sigmas, [&](double sg) {
    if (!fa) return 0.0;
    double sup = 0.0;
    for (const auto& z : centers) sup = std::max(sup, weighted_ball_integral(*fa, z, sg, sg * sg));
    return sup / std::pow(sg, e_int);
  });

  const double e_bdy = n - 1.0 + 2.0 * alpha * (p - 2.0) / (p - 1.0);
  std::optional<HalfSpaceMeasure> ha;
  if (s.h) ha = HalfSpaceMeasure(n).with_boundary_line(gauge_density(*s.h, pw));
  const auto bcenters = boundary_centers(centers);
  SigmaProfile boundary = sigma_profile(sigmas, [&](double sg) {
    if (n == 1) return std::pow(s.h_point, alpha) / std::pow(sg, e_bdy);
    if (!ha) return 0.0;
    double sup = 0.0;
    for (const auto& z : bcenters) sup = std::max(sup, ball_mass(*ha, z, sg));
    return sup / std::pow(sg, e_bdy);
  });
  return {interior, boundary};
}

SigmaProfile log_gauge_smallness(const HalfSpaceMeasure& mu, double beta, double ell, double p, double T,
                             const SmallnessOptions& opts) {
  require_sigma_args(p, T);
  if (!(ell >= 0.0) || !(ell <= 1.0)) throw std::domain_error("log_gauge_smallness: ell must lie in [0, 1]");
  if (!(beta > 0.0)) throw std::domain_error("log_gauge_smallness: beta must be positive");
  const int n = mu.dim();
  require_critical(p, 1.0 + 2.0 / (n + ell), "log_gauge_smallness");
  const Split s = split_measure(mu, "log_gauge_smallness");
  if (s.has_h()) throw std::domain_error("log_gauge_smallness: mu must be of the form x_N f");
  const auto sigmas = sigma_range(T, opts);
  const ConvexGauge phi = ConvexGauge::log_type(beta);
  const double c = std::pow(T, 1.0 / (p - 1.0));

  std::optional<HalfSpaceMeasure> m;
  if (s.f) {
    const Density g = gauge_density(*s.f, phi, c);
    if (ell == 1.0) m = HalfSpaceMeasure(n).with_weighted_density(g);
    else if (ell == 0.0) m = HalfSpaceMeasure(n).with_interior_density(g);
    else
      m = HalfSpaceMeasure(n).with_interior_density(Density(
          n, [g, ell, n](const Coords& y) { return std::pow(y[n - 1], ell) * g(y); }, g.support(), g.singularity()));
  }
  const auto centers = sample_centers(mu, opts.per_axis, opts.box);
  const double a = 0.5 * (n + ell);
  const double rt = std::sqrt(T);
  return sigma_profile(sigmas, [&](double sg) {
    if (!m) return 0.0;
    double sup = 0.0;
    for (const auto& z : centers) sup = std::max(sup, ball_mass(*m, z, sg));
    return sup / (std::pow(T, a) * std::pow(std::log(std::numbers::e + rt / sg), beta - a));
  });
}

SigmaProfile boundary_log_gauge_smallness(const HalfSpaceMeasure& mu, double beta, double p, double T,
                             const SmallnessOptions& opts) {
  require_sigma_args(p, T);
  const int n = mu.dim();
  if (n < 2) throw std::domain_error("boundary_log_gauge_smallness: needs p_{N+1} < 2, i.e. N >= 2");
  if (!(beta > 0.0)) throw std::domain_error("boundary_log_gauge_smallness: beta must be positive");
  require_critical(p, fujita_exponent(n + 1), "boundary_log_gauge_smallness");
  const Split s = split_measure(mu, "boundary_log_gauge_smallness");
  if (s.f) throw std::domain_error("boundary_log_gauge_smallness: mu must live on the boundary");
  const auto sigmas = sigma_range(T, opts);
  const ConvexGauge phi = ConvexGauge::log_type(beta);
  const double c = std::pow(T, 1.0 / (p - 1.0));
  std::optional<HalfSpaceMeasure> m;
  if (s.h) m = HalfSpaceMeasure(n).with_boundary_line(gauge_density(*s.h, phi, c));
  const auto centers = boundary_centers(sample_centers(mu, opts.per_axis, opts.box));
  const double rt = std::sqrt(T);
  return sigma_profile(sigmas, [&](double sg) {
    if (!m) return 0.0;
    double sup = 0.0;
    for (const auto& z : centers) sup = std::max(sup, ball_mass(*m, z, sg));
    return sup / (std::pow(T, 0.5 * (n - 1)) * std::pow(std::log(std::numbers::e + rt / sg), beta - 0.5 * (n + 1)));
  });
}

}  // namespace halfheat
