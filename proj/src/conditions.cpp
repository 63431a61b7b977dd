#include "halfheat/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "halfheat/quadrature.hpp"
#include "halfheat/sampling.hpp"

namespace halfheat {

std::string to_string(ConditionVerdict v) {
  switch (v) {
    case ConditionVerdict::OBSTRUCTED_NONEXISTENCE: return "OBSTRUCTED_NONEXISTENCE";
    case ConditionVerdict::UNOBSTRUCTED: return "UNOBSTRUCTED";
    case ConditionVerdict::INCONCLUSIVE: return "INCONCLUSIVE";
  }
  return "?";
}

std::string to_string(ConditionTag t) {
  switch (t) {
    case ConditionTag::ball: return "ball";
    case ConditionTag::log_interior: return "log_interior";
    case ConditionTag::log_boundary: return "log_boundary";
    case ConditionTag::boundary_mass: return "boundary_mass";
    case ConditionTag::global_growth: return "global_growth";
  }
  return "?";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kCriticalTol = 1e-9;

/// Runs body(i) for i in [0, n) on up to `threads` workers; each index writes its own slot.
template <class F>
void parallel_for(std::size_t n, int threads, F body) {
  const std::size_t nt = std::min<std::size_t>(std::clamp(threads, 1, 64), std::max<std::size_t>(n, 1));
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nt);
  for (std::size_t w = 0; w < nt; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += nt) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Fit {
  double slope = 0.0;
  double halfwidth = 0.0;
  double rms = 0.0;
  double span = 0.0;
  std::size_t points = 0;
};

Fit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  Fit f;
  f.points = x.size();
  if (x.size() < 2) return f;
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (my + f.slope * (x[i] - mx));
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  f.span = *hi - *lo;
  if (x.size() > 2) {
    const boost::math::students_t dist(n - 2.0);
    f.halfwidth = boost::math::quantile(dist, 0.975) * std::sqrt(ss / (n - 2.0) / sxx);
  }
  return f;
}

void require_sigmas(const std::vector<double>& sigmas, double T, const char* who) {
  if (sigmas.empty()) throw std::domain_error(std::string(who) + ": empty sample grid");
  for (double s : sigmas)
    if (!(s > 0.0) || !(s < std::sqrt(T)))
      throw std::domain_error(std::string(who) + ": sigma must lie in (0, sqrt T)");
  const auto [lo, hi] = std::minmax_element(sigmas.begin(), sigmas.end());
  if (*hi / *lo < 100.0 * (1.0 - 1e-9))
    throw std::domain_error(std::string(who) + ": sigma must span at least two decades");
}

/// Sup over centers per sigma, then a divergence verdict from the fit over the two smallest decades.
/// `abscissa` maps sigma to the fit variable; `diverging_sign` is -1 when the functional diverges for a
/// negative slope (ball) and +1 for a positive one (log conditions).
void finish_report(ConditionReport& rep, const std::vector<double>& sigmas, const std::vector<std::vector<double>>& values,
                   const std::vector<Point>& centers, const std::function<double(double)>& abscissa, double diverging_sign,
                   const ConditionOptions& opts) {
  std::vector<std::size_t> order(sigmas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sigmas[a] < sigmas[b]; });

  bool infinite = false;
  std::size_t evaluated = 0;
  for (std::size_t i : order) {
    double sup = 0.0;
    bool any = false;
    for (std::size_t j = 0; j < centers.size(); ++j) {
      const double v = values[i][j];
      if (std::isnan(v)) continue;
      any = true;
      ++evaluated;
      rep.samples.push_back({centers[j], sigmas[i], v});
      if (std::isinf(v)) infinite = true;
      sup = std::max(sup, v);
    }
    if (!any) continue;
    rep.sigmas.push_back(sigmas[i]);
    rep.sup_by_sigma.push_back(sup);
    rep.sup_estimate = std::max(rep.sup_estimate, sup);
  }
  if (evaluated == 0) throw std::domain_error("condition check: no admissible (z, sigma) sample");

  std::ostringstream d;
  if (infinite) {
    rep.verdict = ConditionVerdict::OBSTRUCTED_NONEXISTENCE;
    rep.growth_exponent = diverging_sign * std::numeric_limits<double>::infinity();
    d << "functional is infinite on some ball (non-integrable mass)";
    rep.diagnostic = d.str();
    return;
  }
  if (rep.sup_estimate == 0.0) {
    rep.verdict = ConditionVerdict::UNOBSTRUCTED;
    rep.diagnostic = "functional vanishes on every sample";
    return;
  }
  const double window = rep.sigmas.front() * 100.0 * (1.0 + 1e-9);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < rep.sigmas.size() && rep.sigmas[i] <= window; ++i)
    if (rep.sup_by_sigma[i] > 0.0) {
      x.push_back(abscissa(rep.sigmas[i]));
      y.push_back(std::log(rep.sup_by_sigma[i]));
    }
  if (x.size() < 3) {
    // The sup vanishes at the smallest radii: the functional tends to zero there.
    rep.verdict = ConditionVerdict::UNOBSTRUCTED;
    rep.diagnostic = "functional vanishes at the smallest radii";
    return;
  }
  const Fit fit = fit_line(x, y);
  rep.growth_exponent = fit.slope;
  rep.growth_halfwidth = fit.halfwidth;
  const double range = std::max(std::abs(fit.slope), 0.1) * fit.span;
  d << "fit of " << fit.points << " radii: slope " << fit.slope << " +/- " << fit.halfwidth << ", rms residual "
    << fit.rms;
  if (fit.rms > opts.residual_fraction * range) {
    rep.verdict = ConditionVerdict::INCONCLUSIVE;
    d << " exceeds " << opts.residual_fraction << " of the fitted range";
  } else if (diverging_sign * fit.slope >= opts.slope_tol) {
    rep.verdict = ConditionVerdict::OBSTRUCTED_NONEXISTENCE;
  } else {
    rep.verdict = ConditionVerdict::UNOBSTRUCTED;
  }
  rep.diagnostic = d.str();
}

/// values[i][j] = fn(centers[j], sigmas[i]) (NaN marks a skipped sample).
std::vector<std::vector<double>> evaluate(const std::vector<Point>& centers, const std::vector<double>& sigmas,
                                          const std::function<double(const Point&, double)>& fn, int threads) {
  std::vector<std::vector<double>> out(sigmas.size(), std::vector<double>(centers.size(), kNaN));
  const std::size_t nc = centers.size();
  parallel_for(sigmas.size() * nc, threads, [&](std::size_t idx) {
    const std::size_t i = idx / nc;
    const std::size_t j = idx % nc;
    out[i][j] = fn(centers[j], sigmas[i]);
  });
  return out;
}

double log_factor(double T, double sigma) { return std::log(std::numbers::e + std::sqrt(T) / sigma); }

bool support_away_from_boundary(const HalfSpaceMeasure& mu) {
  if (mu.boundary_line()) return false;
  for (const auto& a : mu.atoms())
    if (a.mass > 0.0 && !(a.location.normal() > 0.0)) return false;
  if (const auto& d = mu.interior()) {
    const auto& s = d->support();
    if (!std::isfinite(s.radius) || !(s.center[mu.dim() - 1] - s.radius > 0.0)) return false;
  }
  return true;
}

std::vector<Point> project_to_boundary(const std::vector<Point>& centers) {
  std::vector<Point> out;
  for (const auto& c : centers) {
    Coords r = c.raw();
    r[c.dim() - 1] = 0.0;
    const Point b(c.dim(), r);
    if (std::none_of(out.begin(), out.end(), [&](const Point& o) { return o.raw() == b.raw(); })) out.push_back(b);
  }
  return out;
}

}  // namespace

SampleGrid default_sample_grid(const HalfSpaceMeasure& mu, double T, const ConditionOptions& opts) {
  if (!(T > 0.0)) throw std::domain_error("default_sample_grid: T must be positive");
  if (!(opts.sigma_lo > 0.0) || !(opts.sigma_hi > opts.sigma_lo) || !(opts.sigma_hi < 1.0))
    throw std::domain_error("default_sample_grid: need 0 < sigma_lo < sigma_hi < 1");
  SampleGrid g;
  g.centers = sample_centers(mu, opts.per_axis);
  g.sigmas = geometric_radii(opts.sigma_lo * std::sqrt(T), opts.sigma_hi * std::sqrt(T), 2.0);
  return g;
}

ConditionReport check_ball_condition(const HalfSpaceMeasure& mu, double p, double T, const std::optional<SampleGrid>& grid,
                                     const ConditionOptions& opts) {
  if (!(p > 1.0)) throw std::domain_error("check_ball_condition: p must exceed 1");
  if (!(T > 0.0)) throw std::domain_error("check_ball_condition: T must be positive");
  const SampleGrid g = grid ? *grid : default_sample_grid(mu, T, opts);
  if (g.centers.empty()) throw std::domain_error("check_ball_condition: empty sample grid");
  require_sigmas(g.sigmas, T, "check_ball_condition");
  const double e = 2.0 / (p - 1.0);
  const auto values = evaluate(
      g.centers, g.sigmas,
      [&](const Point& z, double s) {
        const double m = ball_mass(mu, z, s);
        if (m == 0.0) return 0.0;
        return m / (std::pow(s, -e) * half_ball_moment(z, s));
      },
      opts.threads);
  ConditionReport rep;
  rep.which = ConditionTag::ball;
  finish_report(rep, g.sigmas, values, g.centers, [](double s) { return std::log(s); }, -1.0, opts);
  return rep;
}

ConditionReport check_log_condition_pN(const HalfSpaceMeasure& mu, double T, const std::optional<SampleGrid>& grid,
                                       const ConditionOptions& opts) {
  if (!(T > 0.0)) throw std::domain_error("check_log_condition_pN: T must be positive");
  SampleGrid g = grid ? *grid : default_sample_grid(mu, T, opts);
  if (!grid && !g.sigmas.empty()) {
    // Lifted copies keep every center admissible at the largest radius.
    const double lift = 3.0 * *std::max_element(g.sigmas.begin(), g.sigmas.end());
    const std::size_t count = g.centers.size();
    for (std::size_t i = 0; i < count; ++i)
      if (g.centers[i].normal() < lift) {
        Coords c = g.centers[i].raw();
        c[mu.dim() - 1] = lift;
        g.centers.emplace_back(mu.dim(), c);
      }
  }
  if (g.centers.empty()) throw std::domain_error("check_log_condition_pN: empty sample grid");
  require_sigmas(g.sigmas, T, "check_log_condition_pN");
  if (grid) {
    const double smax = *std::max_element(g.sigmas.begin(), g.sigmas.end());
    for (const auto& z : g.centers)
      if (z.normal() < 3.0 * smax)
        throw std::domain_error("check_log_condition_pN: sample center with z_N < 3 sigma");
  }
  const double n = mu.dim();
  const auto values = evaluate(
      g.centers, g.sigmas,
      [&](const Point& z, double s) {
        if (z.normal() < 3.0 * s) return kNaN;
        const double m = ball_mass(mu, z, s);
        return m == 0.0 ? 0.0 : m / z.normal() * std::pow(log_factor(T, s), n / 2.0);
      },
      opts.threads);
  ConditionReport rep;
  rep.which = ConditionTag::log_interior;
  finish_report(rep, g.sigmas, values, g.centers, [&](double s) { return std::log(log_factor(T, s)); }, 1.0, opts);
  return rep;
}

ConditionReport check_log_condition_pN1(const HalfSpaceMeasure& mu, double T, const std::optional<SampleGrid>& grid,
                                        const ConditionOptions& opts) {
  if (!(T > 0.0)) throw std::domain_error("check_log_condition_pN1: T must be positive");
  SampleGrid g;
  if (grid) {
    g = *grid;
    for (const auto& z : g.centers)
      if (z.normal() != 0.0) throw std::domain_error("check_log_condition_pN1: sample center off the boundary");
  } else {
    g = default_sample_grid(mu, T, opts);
    g.centers = project_to_boundary(g.centers);
  }
  if (g.centers.empty()) throw std::domain_error("check_log_condition_pN1: empty sample grid");
  require_sigmas(g.sigmas, T, "check_log_condition_pN1");
  const double n = mu.dim();
  const auto values = evaluate(
      g.centers, g.sigmas,
      [&](const Point& z, double s) {
        const double m = ball_mass(mu, z, s);
        return m == 0.0 ? 0.0 : m * std::pow(log_factor(T, s), (n + 1.0) / 2.0);
      },
      opts.threads);
  ConditionReport rep;
  rep.which = ConditionTag::log_boundary;
  finish_report(rep, g.sigmas, values, g.centers, [&](double s) { return std::log(log_factor(T, s)); }, 1.0, opts);
  return rep;
}

ConditionReport check_boundary_mass(const HalfSpaceMeasure& mu, double p) {
  if (!(p > 1.0)) throw std::domain_error("check_boundary_mass: p must exceed 1");
  ConditionReport rep;
  rep.which = ConditionTag::boundary_mass;
  const double m = boundary_mass(mu);
  rep.sup_estimate = m;
  rep.samples.push_back({Point::origin(mu.dim()), 0.0, m});
  const bool obstructed = p >= 2.0 && m > 0.0;
  rep.verdict = obstructed ? ConditionVerdict::OBSTRUCTED_NONEXISTENCE : ConditionVerdict::UNOBSTRUCTED;
  std::ostringstream d;
  d << "mass on the boundary " << m << (p >= 2.0 ? " (p >= 2: must vanish)" : " (p < 2: allowed)");
  rep.diagnostic = d.str();
  return rep;
}

ConditionReport check_global_growth(const HalfSpaceMeasure& mu, double p, const GrowthOptions& opts) {
  const int n = mu.dim();
  const double pn = fujita_exponent(n);
  const double pn1 = fujita_exponent(n + 1);
  if (!(p > 1.0)) throw std::domain_error("check_global_growth: p must exceed 1");
  if (!(p < pn1) && !(p < pn && support_away_from_boundary(mu)))
    throw std::domain_error("check_global_growth: needs p < p_{N+1}, or p < p_N with support away from the boundary");
  if (!(opts.first_box > 0.0) || opts.doublings < 2 || opts.per_axis < 2)
    throw std::domain_error("check_global_growth: need first_box > 0, doublings >= 2, per_axis >= 2");

  std::vector<Point> extra;
  for (const auto& a : mu.atoms()) extra.push_back(a.location);
  if (mu.interior() && mu.interior()->singularity()) extra.emplace_back(n, mu.interior()->singularity()->center);

  ConditionReport rep;
  rep.which = ConditionTag::global_growth;
  double running = 0.0;
  for (int j = 0; j <= opts.doublings; ++j) {
    const double box = opts.first_box * std::ldexp(1.0, j);
    std::vector<Point> centers;
    std::vector<int> k(n, 0);
    while (true) {
      Coords c{};
      for (int i = 0; i < n; ++i) {
        const double u = static_cast<double>(k[i]) / (opts.per_axis - 1);
        c[i] = i == n - 1 ? box * u : box * (2.0 * u - 1.0);
      }
      centers.emplace_back(n, c);
      int i = 0;
      while (i < n && ++k[i] == opts.per_axis) k[i++] = 0;
      if (i == n) break;
    }
    for (const auto& e : extra) {
      bool inside = e.normal() <= box;
      for (int i = 0; i + 1 < n; ++i) inside = inside && std::abs(e[i]) <= box;
      if (inside) centers.push_back(e);
    }
    std::vector<double> vals(centers.size());
    parallel_for(centers.size(), opts.threads, [&](std::size_t i) {
      vals[i] = ball_mass(mu, centers[i], 1.0) / (1.0 + centers[i].normal());
    });
    for (std::size_t i = 0; i < centers.size(); ++i) {
      rep.samples.push_back({centers[i], 1.0, vals[i]});
      running = std::max(running, vals[i]);
    }
    rep.sigmas.push_back(box);
    rep.sup_by_sigma.push_back(running);
  }
  rep.sup_estimate = running;
  std::ostringstream d;
  if (!std::isfinite(running)) {
    rep.verdict = ConditionVerdict::OBSTRUCTED_NONEXISTENCE;
    rep.diagnostic = "unit-ball mass is infinite";
    return rep;
  }
  if (running == 0.0) {
    rep.verdict = ConditionVerdict::UNOBSTRUCTED;
    rep.diagnostic = "zero measure";
    return rep;
  }
  const std::size_t m = rep.sup_by_sigma.size();
  const double prev = rep.sup_by_sigma[m - 2];
  const double increase = prev > 0.0 ? (running - prev) / prev : std::numeric_limits<double>::infinity();
  std::vector<double> x, y;
  for (std::size_t i = m - 3; i < m; ++i)
    if (rep.sup_by_sigma[i] > 0.0) {
      x.push_back(std::log(rep.sigmas[i]));
      y.push_back(std::log(rep.sup_by_sigma[i]));
    }
  const Fit fit = fit_line(x, y);
  rep.growth_exponent = fit.slope;
  rep.growth_halfwidth = fit.halfwidth;
  d << "running sup " << running << ", last doubling adds " << increase * 100.0 << "%, slope " << fit.slope;
  if (increase < opts.stable_increase)
    rep.verdict = ConditionVerdict::UNOBSTRUCTED;
  else if (x.size() >= 2 && fit.slope >= opts.slope_tol)
    rep.verdict = ConditionVerdict::OBSTRUCTED_NONEXISTENCE;
  else
    rep.verdict = ConditionVerdict::INCONCLUSIVE;
  rep.diagnostic = d.str();
  return rep;
}

ClassifierReport classify_measure(const HalfSpaceMeasure& mu, double p, double T, const ConditionOptions& opts) {
  ClassifierReport out;
  out.reports.push_back(check_boundary_mass(mu, p));
  out.reports.push_back(check_ball_condition(mu, p, T, {}, opts));
  const int n = mu.dim();
  if (std::abs(p - fujita_exponent(n)) < kCriticalTol) out.reports.push_back(check_log_condition_pN(mu, T, {}, opts));
  if (std::abs(p - fujita_exponent(n + 1)) < kCriticalTol)
    out.reports.push_back(check_log_condition_pN1(mu, T, {}, opts));
  out.verdict = ConditionVerdict::UNOBSTRUCTED;
  for (const auto& r : out.reports) {
    if (r.verdict == ConditionVerdict::OBSTRUCTED_NONEXISTENCE) {
      out.verdict = r.verdict;
      break;
    }
    if (r.verdict == ConditionVerdict::INCONCLUSIVE) out.verdict = r.verdict;
  }
  return out;
}

std::vector<RateSample> blow_up_rate_functionals(const SolutionField& u, double T, const std::vector<double>& times) {
  if (!u.grid) throw std::invalid_argument("blow_up_rate_functionals: field has no grid");
  if (!(u.p > 1.0)) throw std::domain_error("blow_up_rate_functionals: field has no exponent p > 1");
  const Grid& grid = *u.grid;
  const auto& ts = grid.times();
  std::vector<std::size_t> slices;
  if (times.empty()) {
    for (std::size_t k = 0; k < ts.size(); ++k)
      if (ts[k] < T) slices.push_back(k);
  } else {
    for (double t : times) {
      if (!(t < T)) throw std::domain_error("blow_up_rate_functionals: sample time must be < T");
      std::size_t best = 0;
      for (std::size_t k = 1; k < ts.size(); ++k)
        if (std::abs(ts[k] - t) < std::abs(ts[best] - t)) best = k;
      if (std::abs(ts[best] - t) > 1e-9 * std::max(1.0, t))
        throw std::domain_error("blow_up_rate_functionals: time is not a grid time");
      if (!(ts[best] < T)) throw std::domain_error("blow_up_rate_functionals: sample time must be < T");
      slices.push_back(best);
    }
  }
  const int n = grid.dim();
  const double q = 1.0 / (u.p - 1.0);
  quadrature::PolarOptions popts;
  popts.rel_tol = 1e-6;
  popts.max_intervals = 64;
  std::vector<RateSample> out;
  for (std::size_t k : slices) {
    const double t = ts[k];
    const double rho = std::sqrt(T - t);
    const auto& slice = u.values.at(k);
    const std::size_t imax = static_cast<std::size_t>(std::max_element(slice.begin(), slice.end()) - slice.begin());
    const Point peak = grid.node(imax);
    const double peak_value = slice[imax];

    Coords ci = peak.raw();
    ci[n - 1] = std::max(ci[n - 1], rho);
    const Point xi(n, ci);
    Coords cb = peak.raw();
    cb[n - 1] = 0.0;
    const Point xb(n, cb);

    for (RateKind kind : {RateKind::interior, RateKind::boundary}) {
      RateSample s;
      s.kind = kind;
      s.t = t;
      s.x = kind == RateKind::interior ? xi : xb;
      if (peak_value > 0.0) {
        quadrature::Region region{n, true, {{s.x.raw(), rho}}};
        const bool weighted = kind == RateKind::boundary;
        s.value = quadrature::integrate_polar(
            region, s.x.raw(),
            [&](const Coords& y) {
              Coords c = y;
              c[n - 1] = std::max(0.0, c[n - 1]);
              const double v = u.at(Point(n, c), k);
              return weighted ? c[n - 1] * v : v;
            },
            popts);
      }
      const double e = kind == RateKind::interior ? n / 2.0 - q : (n + 1.0) / 2.0 - q;
      s.bound = std::pow(T - t, e);
      s.ratio = s.value / s.bound;
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace halfheat
