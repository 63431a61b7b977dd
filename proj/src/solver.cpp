#include "halfheat/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace halfheat {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

std::vector<double> slice_sups(const SliceValues& v) {
  std::vector<double> s(v.size(), 0.0);
  for (std::size_t k = 0; k < v.size(); ++k)
    for (double x : v[k]) s[k] = std::max(s[k], x);
  return s;
}

bool all_finite(const SliceValues& v) {
  for (const auto& s : v)
    for (double x : s)
      if (!std::isfinite(x)) return false;
  return true;
}

SliceValues scaled(const SliceValues& v, double c) {
  SliceValues out = v;
  for (auto& s : out)
    for (double& x : s) x *= c;
  return out;
}

void add_centers(GridSpec& g, const Coords& c, int dim, bool tangential_part) {
  const double cn = c[dim - 1];
  if (!tangential_part && cn > 0.0) g.normal_refine.push_back(cn);
  if (tangential_part || dim > 1)
    for (int i = 0; i + 1 < dim; ++i) g.tangential_refine.push_back(c[i]);
}

// Refine centers and core extents from the data.
GridSpec adapt_grid(GridSpec g, const HalfSpaceMeasure& mu) {
  const int n = mu.dim();
  if (g.dim != n) throw std::invalid_argument("grid dimension does not match the measure");
  const double sr = mu.support_radius();
  if (!std::isfinite(sr)) throw std::domain_error("solver needs compactly supported data");
  g.normal_core = std::max(g.normal_core, sr + 0.5);
  g.tangential_core = std::max(g.tangential_core, sr + 0.5);
  if (mu.interior() && mu.interior()->singularity()) add_centers(g, mu.interior()->singularity()->center, n, false);
  if (mu.boundary_line() && mu.boundary_line()->singularity()) {
    const Coords& c = mu.boundary_line()->singularity()->center;
    for (int i = 0; i + 1 < n; ++i) g.tangential_refine.push_back(c[i]);
  }
  for (const auto& a : mu.atoms()) add_centers(g, a.location.raw(), n, false);
  auto dedupe = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedupe(g.normal_refine);
  dedupe(g.tangential_refine);
  return g;
}

void require_support_inside(const HalfSpaceMeasure& mu, const Grid& grid) {
  const double R = grid.normal().back();
  if (!(mu.support_radius() < 0.5 * R))
    throw std::domain_error("measure support radius must be below half the grid extent");
}

bool converges(SolveStatus s) { return s == SolveStatus::CONVERGED; }

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::CONVERGED: return "CONVERGED";
    case SolveStatus::ITERATING: return "ITERATING";
    case SolveStatus::DIVERGED: return "DIVERGED";
  }
  return "?";
}

std::string to_string(DichotomyOutcome o) {
  switch (o) {
    case DichotomyOutcome::BRACKET: return "bracket";
    case DichotomyOutcome::ALL_DIVERGE: return "all-diverge";
    case DichotomyOutcome::ALL_CONVERGE: return "all-converge";
  }
  return "?";
}

void PicardCaps::validate() const {
  if (max_sweeps < 1) throw std::domain_error("max_sweeps must be at least 1");
  if (!(sup_cap > 1.0)) throw std::domain_error("sup_cap must exceed 1");
  if (!(tol > 0.0)) throw std::domain_error("tol must be positive");
  if (growth_window < 2) throw std::domain_error("growth_window must be at least 2");
  if (!(nonlinear_scale >= 0.0)) throw std::domain_error("nonlinear_scale must be nonnegative");
}

double SolutionField::slice_sup(std::size_t k) const {
  double s = 0.0;
  for (double x : values.at(k)) s = std::max(s, x);
  return s;
}

double SolutionField::at(const Point& x, std::size_t k) const { return interpolate(*grid, values.at(k), x); }

SliceValues linear_evolution(const HalfSpaceMeasure& mu, const Grid& grid, const kernels::KernelConfig& cfg) {
  if (mu.dim() != grid.dim()) throw std::invalid_argument("linear_evolution: dimension mismatch");
  const std::size_t n = grid.nodes_per_slice();
  SliceValues u(grid.times().size(), std::vector<double>(n, 0.0));
  if (mu.is_zero()) return u;
  std::vector<Point> nodes;
  nodes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(grid.node(i));
  for (std::size_t k = 0; k < u.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) u[k][i] = apply_K(mu, nodes[i], grid.times()[k], cfg);
  return u;
}

SolutionField picard_solve(const SliceValues& u0, double p, const DuhamelOperator& op, const PicardCaps& caps) {
  if (!(p > 1.0)) throw std::domain_error("picard_solve: p must exceed 1");
  caps.validate();
  const Grid& grid = op.grid();
  const std::size_t K = grid.times().size();
  const std::size_t n = grid.nodes_per_slice();
  if (u0.size() != K) throw std::invalid_argument("picard_solve: linear evolution has wrong slice count");
  for (const auto& s : u0)
    if (s.size() != n) throw std::invalid_argument("picard_solve: linear evolution has wrong slice size");

  SolutionField out;
  out.grid = op.grid_ptr();
  out.p = p;
  out.values = u0;
  out.slice_status.assign(K, SolveStatus::ITERATING);

  if (!all_finite(u0)) {
    out.status = SolveStatus::DIVERGED;
    out.slice_status.assign(K, SolveStatus::DIVERGED);
    out.diagnostic = "linear evolution is infinite at grid nodes (measure too singular for the grid)";
    return out;
  }
  const std::vector<double> sup0 = slice_sups(u0);
  double global0 = 0.0;
  for (double s : sup0) global0 = std::max(global0, s);
  out.sup_history.push_back(global0);
  out.amplification_history.push_back(global0 > 0.0 ? 1.0 : 0.0);

  SliceValues F(K, std::vector<double>(n, 0.0));
  double prev_inc = 0.0;
  double prev_ratio = 0.0;
  int accelerating = 0;
  for (int sweep = 1; sweep <= caps.max_sweeps; ++sweep) {
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < n; ++i) F[k][i] = caps.nonlinear_scale * std::pow(out.values[k][i], p);
    SliceValues next = op.apply(F);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < n; ++i) next[k][i] += u0[k][i];
    out.iterations = sweep;

    if (!all_finite(next)) {
      out.status = SolveStatus::DIVERGED;
      out.slice_status.assign(K, SolveStatus::DIVERGED);
      out.diagnostic = "iterate overflowed at sweep " + std::to_string(sweep);
      return out;
    }

    const std::vector<double> sup = slice_sups(next);
    double global = 0.0;
    double amp = 0.0;
    double change = 0.0;
    double inc = 0.0;
    bool all_converged = true;
    for (std::size_t k = 0; k < K; ++k) {
      global = std::max(global, sup[k]);
      double dk = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = next[k][i] - out.values[k][i];
        if (d < -1e-14 * std::max(sup[k], kTiny)) ++out.monotonicity_violations;
        dk = std::max(dk, d);
      }
      const double rel = sup[k] > 0.0 ? dk / sup[k] : 0.0;
      const double a = sup0[k] > 0.0 ? sup[k] / sup0[k] : (sup[k] > 0.0 ? caps.sup_cap * 2.0 : 0.0);
      change = std::max(change, rel);
      amp = std::max(amp, a);
      if (sup0[k] > 0.0) inc = std::max(inc, dk / sup0[k]);
      if (a > caps.sup_cap)
        out.slice_status[k] = SolveStatus::DIVERGED;
      else if (rel < caps.tol)
        out.slice_status[k] = SolveStatus::CONVERGED;
      else
        out.slice_status[k] = SolveStatus::ITERATING;
      all_converged = all_converged && rel < caps.tol;
    }
    out.values = std::move(next);
    out.sup_history.push_back(global);
    out.amplification_history.push_back(amp);
    out.change_history.push_back(change);

    if (amp > caps.sup_cap) {
      out.status = SolveStatus::DIVERGED;
      out.diagnostic = "slice sup exceeded sup_cap times the linear evolution at sweep " + std::to_string(sweep);
      return out;
    }
    if (all_converged) {
      out.status = SolveStatus::CONVERGED;
      return out;
    }
    const double ratio = prev_inc > 0.0 ? inc / prev_inc : 0.0;
    if (ratio > 1.0 && ratio >= prev_ratio)
      ++accelerating;
    else
      accelerating = 0;
    if (accelerating >= caps.growth_window) {
      out.status = SolveStatus::DIVERGED;
      out.slice_status.assign(K, SolveStatus::DIVERGED);
      out.diagnostic = "super-geometric growth over " + std::to_string(caps.growth_window) + " sweeps";
      return out;
    }
    prev_inc = inc;
    prev_ratio = ratio;
  }
  out.status = SolveStatus::ITERATING;
  out.diagnostic = "max_sweeps reached";
  return out;
}

SolutionField picard_solve(const HalfSpaceMeasure& mu, double p, const DuhamelOperator& op, const PicardCaps& caps) {
  require_support_inside(mu, op.grid());
  return picard_solve(linear_evolution(mu, op.grid()), p, op, caps);
}

SolutionField picard_solve(const HalfSpaceMeasure& mu, double p, const GridSpec& grid, const PicardCaps& caps) {
  const DuhamelOperator op(std::make_shared<const Grid>(adapt_grid(grid, mu)));
  return picard_solve(mu, p, op, caps);
}

double duhamel_integral(const SolutionField& u, const Point& x, std::size_t k, double p, const DuhamelOperator& op) {
  if (!(p >= 1.0)) throw std::domain_error("duhamel_integral: p must be at least 1");
  if (u.values.size() <= k) throw std::logic_error("duhamel_integral: field lacks the requested time slices");
  const std::size_t K = op.grid().times().size();
  const std::size_t n = op.grid().nodes_per_slice();
  SliceValues F(K, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j <= k; ++j) {
    if (u.values[j].size() != n) throw std::invalid_argument("duhamel_integral: field does not match the grid");
    for (std::size_t i = 0; i < n; ++i) F[j][i] = std::pow(u.values[j][i], p);
  }
  const SliceValues I = op.apply(F);
  return std::max(0.0, op.evaluate(F, I, x, k));
}

GridSpec default_grid(const HalfSpaceMeasure& mu, double T) {
  GridSpec g;
  g.dim = mu.dim();
  g.T = T;
  bool singular = !mu.atoms().empty() || mu.boundary_line().has_value();
  if (mu.interior() && mu.interior()->singularity()) singular = true;
  g.t_min_ratio = singular ? 1e-14 : 1e-8;
  g.time_nodes = 64;
  g.uniform_time_nodes = 24;
  if (g.dim > 1) {
    g.time_nodes = 40;
    g.uniform_time_nodes = 12;
    g.grading = 1.3;
    g.h_core = 0.1;
    g.t_min_ratio = singular ? 1e-8 : 1e-6;
  }
  return adapt_grid(g, mu);
}

namespace {

struct Family {
  std::shared_ptr<const Grid> grid;
  std::unique_ptr<DuhamelOperator> op;
  SliceValues u0;
};

Family make_family(const HalfSpaceMeasure& unit, const GridSpec& spec, int threads) {
  Family f;
  f.grid = std::make_shared<const Grid>(spec);
  require_support_inside(unit, *f.grid);
  f.op = std::make_unique<DuhamelOperator>(f.grid, threads);
  f.u0 = linear_evolution(unit, *f.grid);
  return f;
}

}  // namespace

DichotomyResult dichotomy_bisect(const HalfSpaceMeasure& unit, double p, const GridSpec& grid,
                                 const DichotomyOptions& opts) {
  if (!(p > 1.0)) throw std::domain_error("dichotomy_bisect: p must exceed 1");
  if (!(opts.kappa_min > 0.0) || !(opts.kappa_max > opts.kappa_min))
    throw std::domain_error("dichotomy_bisect: need 0 < kappa_min < kappa_max");
  if (!(opts.ratio_tol > 1.0)) throw std::domain_error("dichotomy_bisect: ratio_tol must exceed 1");
  const GridSpec spec = adapt_grid(grid, unit);
  Family fam = make_family(unit, spec, opts.threads);

  DichotomyResult res;
  res.spatial_nodes = fam.grid->nodes_per_slice();
  res.time_nodes = fam.grid->times().size();
  auto run = [&](Family& f, double kappa, bool refined) {
    const SolutionField u = picard_solve(scaled(f.u0, kappa), p, *f.op, opts.caps);
    res.evaluations.push_back({kappa, u.status, u.iterations, refined});
    return u.status;
  };

  const SolveStatus bottom = run(fam, opts.kappa_min, false);
  if (!converges(bottom)) {
    res.outcome = DichotomyOutcome::ALL_DIVERGE;
    res.kappa_lo = 0.0;
    res.kappa_hi = opts.kappa_min;
    res.bracket_ratio = std::numeric_limits<double>::infinity();
    if (opts.refine) {
      Family fine = make_family(unit, spec.refined(), opts.threads);
      res.refinement_trend.checked = true;
      res.refinement_trend.hi_refined = run(fine, opts.kappa_min, true);
      res.refinement_trend.persistent = !converges(*res.refinement_trend.hi_refined);
    }
    return res;
  }
  const SolveStatus top = run(fam, opts.kappa_max, false);
  if (converges(top)) {
    res.outcome = DichotomyOutcome::ALL_CONVERGE;
    res.kappa_lo = opts.kappa_max;
    res.kappa_hi = std::numeric_limits<double>::infinity();
    res.bracket_ratio = std::numeric_limits<double>::infinity();
    return res;
  }
  double lo = opts.kappa_min;
  double hi = opts.kappa_max;
  while (hi / lo > opts.ratio_tol) {
    const double mid = std::sqrt(lo * hi);
    if (converges(run(fam, mid, false)))
      lo = mid;
    else
      hi = mid;
  }
  res.outcome = DichotomyOutcome::BRACKET;
  res.kappa_lo = lo;
  res.kappa_hi = hi;
  res.bracket_ratio = hi / lo;
  if (opts.refine) {
    Family fine = make_family(unit, spec.refined(), opts.threads);
    res.refinement_trend.checked = true;
    res.refinement_trend.lo_refined = run(fine, lo, true);
    res.refinement_trend.hi_refined = run(fine, hi, true);
    res.refinement_trend.persistent =
        converges(*res.refinement_trend.lo_refined) && !converges(*res.refinement_trend.hi_refined);
  }
  return res;
}

DichotomyResult dichotomy_bisect(const SingularProfile& profile, double p, const GridSpec& grid,
                                 const DichotomyOptions& opts) {
  profile.validate();
  if (std::abs(profile.p - p) > 1e-12 * p)
    throw std::domain_error("dichotomy_bisect: profile exponent does not match p");
  return dichotomy_bisect(make_profile(profile, 1.0), p, grid, opts);
}

double weighted_pairing(const Grid& grid, const std::vector<double>& values, const TestFunction& phi) {
  using GL = boost::math::quadrature::gauss<double, 6>;
  static const auto rule = [] {
    std::vector<std::pair<double, double>> r;
    const auto& ab = GL::abscissa();
    const auto& wt = GL::weights();
    for (std::size_t i = 0; i < ab.size(); ++i)
      for (double s : {-1.0, 1.0}) r.emplace_back(0.5 * (1.0 + s * ab[i]), 0.5 * wt[i]);
    return r;
  }();
  const int d = grid.dim();
  const auto& xn = grid.normal();
  const auto& xt = grid.tangential();
  // Cells along each axis: normal cells start at 0, tangential cells between nodes.
  std::vector<std::pair<double, double>> ncell;
  ncell.emplace_back(0.0, xn.front());
  for (std::size_t i = 1; i < xn.size(); ++i) ncell.emplace_back(xn[i - 1], xn[i]);
  std::vector<std::pair<double, double>> tcell;
  for (std::size_t i = 1; i < xt.size(); ++i) tcell.emplace_back(xt[i - 1], xt[i]);

  double total = 0.0;
  auto eval = [&](const Coords& c) {
    const double u = interpolate(grid, values, Point(d, c));
    return u == 0.0 ? 0.0 : c[d - 1] * u * phi(c);
  };
  const std::size_t t1 = d > 1 ? tcell.size() : 1;
  const std::size_t t2 = d > 2 ? tcell.size() : 1;
  for (std::size_t b = 0; b < t2; ++b)
    for (std::size_t a = 0; a < t1; ++a)
      for (const auto& [n0, n1] : ncell) {
        double cell = 0.0;
        for (const auto& [sn, wn] : rule)
          for (std::size_t qa = 0; qa < (d > 1 ? rule.size() : 1); ++qa)
            for (std::size_t qb = 0; qb < (d > 2 ? rule.size() : 1); ++qb) {
              Coords c{};
              c[d - 1] = n0 + sn * (n1 - n0);
              double w = wn * (n1 - n0);
              if (d > 1) {
                c[0] = tcell[a].first + rule[qa].first * (tcell[a].second - tcell[a].first);
                w *= rule[qa].second * (tcell[a].second - tcell[a].first);
              }
              if (d > 2) {
                c[1] = tcell[b].first + rule[qb].first * (tcell[b].second - tcell[b].first);
                w *= rule[qb].second * (tcell[b].second - tcell[b].first);
              }
              cell += w * eval(c);
            }
        total += cell;
      }
  return total;
}

std::vector<TraceResult> initial_trace(const SolutionField& u, const std::vector<TestFunction>& tests,
                                       const std::vector<double>& extrapolation_times) {
  if (!u.grid) throw std::invalid_argument("initial_trace: field without grid");
  if (extrapolation_times.empty()) throw std::invalid_argument("initial_trace: no extrapolation times");
  const auto& times = u.grid->times();
  std::vector<std::size_t> idx;
  for (double t : extrapolation_times) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < times.size(); ++k)
      if (std::abs(std::log(times[k] / t)) < std::abs(std::log(times[best] / t))) best = k;
    if (!(std::abs(times[best] - t) <= 1e-9 * t) || best >= u.values.size())
      throw std::invalid_argument("initial_trace: extrapolation time is not a grid time of the field");
    idx.push_back(best);
  }
  std::vector<TraceResult> out;
  for (const auto& phi : tests) {
    TraceResult r;
    for (std::size_t k : idx) {
      r.times.push_back(times[k]);
      r.pairings.push_back(weighted_pairing(*u.grid, u.values[k], phi));
    }
    const std::size_t m = r.times.size();
    if (m == 1) {
      r.limit = r.pairings[0];
    } else {
      double mt = 0.0, mi = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        mt += r.times[i];
        mi += r.pairings[i];
      }
      mt /= m;
      mi /= m;
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        sxy += (r.times[i] - mt) * (r.pairings[i] - mi);
        sxx += (r.times[i] - mt) * (r.times[i] - mt);
      }
      const double c = sxx > 0.0 ? sxy / sxx : 0.0;
      r.limit = mi - c * mt;
      double spread = 0.0, rss = 0.0;
      int sign_changes = 0;
      for (std::size_t i = 0; i < m; ++i) {
        spread = std::max(spread, std::abs(r.pairings[i]));
        const double e = r.pairings[i] - (r.limit + c * r.times[i]);
        rss += e * e;
        if (i >= 2) {
          const double d1 = r.pairings[i - 1] - r.pairings[i - 2];
          const double d2 = r.pairings[i] - r.pairings[i - 1];
          if (d1 * d2 < 0.0) ++sign_changes;
        }
      }
      const double rms = std::sqrt(rss / m);
      r.inconclusive = spread > 0.0 && (rms > 1e-2 * spread || sign_changes >= 2);
    }
    out.push_back(std::move(r));
  }
  return out;
}

GlobalProbeReport global_existence_probe(const HalfSpaceMeasure& mu, double p, const std::vector<double>& horizons,
                                         const GridSpec& base, const PicardCaps& caps, int threads) {
  if (!(p > 1.0)) throw std::domain_error("global_existence_probe: p must exceed 1");
  if (horizons.empty()) throw std::invalid_argument("global_existence_probe: empty horizon list");
  for (std::size_t i = 0; i < horizons.size(); ++i)
    if (!(horizons[i] > 0.0) || (i > 0 && !(horizons[i] > horizons[i - 1])))
      throw std::domain_error("global_existence_probe: horizons must be positive and increasing");
  GlobalProbeReport rep;
  for (double T : horizons) {
    const GridSpec spec = adapt_grid(base.with_horizon(T), mu);
    auto grid = std::make_shared<const Grid>(spec);
    const DuhamelOperator op(grid, threads);
    const SolutionField u = picard_solve(mu, p, op, caps);
    rep.horizons.push_back({T, u.status, u.iterations, u.amplification_history.back()});
    if (converges(u.status)) rep.largest_converged = T;
  }
  std::size_t first_bad = rep.horizons.size();
  for (std::size_t i = 0; i < rep.horizons.size(); ++i)
    if (!converges(rep.horizons[i].status)) {
      first_bad = i;
      break;
    }
  if (first_bad == rep.horizons.size()) {
    rep.trend = "converges-at-all-horizons";
  } else {
    bool tail_bad = true;
    for (std::size_t i = first_bad; i < rep.horizons.size(); ++i) tail_bad = tail_bad && !converges(rep.horizons[i].status);
    rep.trend = tail_bad ? "diverges-eventually" : "mixed";
  }
  return rep;
}

}  // namespace halfheat
