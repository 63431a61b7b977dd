#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "halfheat/solver.hpp"

using namespace halfheat;

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

std::shared_ptr<const Grid> make_grid(const GridSpec& s) { return std::make_shared<const Grid>(s); }

GridSpec smooth_spec(double T = 1.0) {
  GridSpec g;
  g.T = T;
  g.t_min_ratio = 1e-8;
  g.time_nodes = 40;
  g.uniform_time_nodes = 12;
  return g;
}

SliceValues constant_source(const Grid& g, double c) {
  return SliceValues(g.times().size(), std::vector<double>(g.nodes_per_slice(), c));
}

// int_0^t erf(a / sqrt(tau)) w(tau) dtau with panel breaks around the transition tau ~ a^2.
template <class W>
double erf_integral(double a, double t, W&& w) {
  double total = 0.0;
  double lo = 0.0;
  for (double b : {1e-2 * a * a, 0.1 * a * a, a * a, 10.0 * a * a, 100.0 * a * a, t}) {
    b = std::min(b, t);
    if (b <= lo) continue;
    total += GK::integrate([&](double tau) { return std::erf(a / std::sqrt(tau)) * w(tau); }, lo, b, 15, 1e-14);
    lo = b;
  }
  return total;
}

double erf_history(double x, double t) {
  return erf_integral(0.5 * x, t, [](double) { return 1.0; });
}

}  // namespace

TEST_CASE("grid construction") {
  GridSpec s;
  s.T = 2.0;
  s.time_nodes = 30;
  s.uniform_time_nodes = 10;
  s.normal_refine = {1.0};
  const Grid g(s);
  CHECK(g.normal().front() > 0.0);
  for (std::size_t i = 1; i < g.normal().size(); ++i) CHECK(g.normal()[i] > g.normal()[i - 1]);
  CHECK(g.times().size() == 30);
  CHECK(g.times().front() == doctest::Approx(2e-10));
  CHECK(g.times().back() == 2.0);
  for (std::size_t k = 1; k < g.times().size(); ++k) CHECK(g.times()[k] > g.times()[k - 1]);
  // Uniform tail of step T / 11.
  CHECK(g.times()[29] - g.times()[28] == doctest::Approx(2.0 / 11.0));
  // The refine center is a node and its neighbours are close.
  const auto& n = g.normal();
  const auto it = std::lower_bound(n.begin(), n.end(), 1.0);
  CHECK(*it - *(it - 1) < 1e-4);
  CHECK(*it - 1.0 < 1e-4);
  CHECK(n.back() >= 2.0 + 12.0 * std::sqrt(2.0) - 1e-12);

  const GridSpec r = s.refined();
  CHECK(r.time_nodes == 60);
  CHECK(Grid(r).normal().size() > n.size());

  GridSpec two = s;
  two.dim = 2;
  const Grid g2(two);
  CHECK(g2.nodes_per_slice() == g2.normal_count() * g2.tangential().size());
  const Point p = g2.node(g2.index(3, 5));
  CHECK(p[1] == g2.normal()[3]);
  CHECK(p[0] == g2.tangential()[5]);

  GridSpec bad = s;
  bad.grading = 1.0;
  CHECK_THROWS_AS(Grid{bad}, std::domain_error);
  bad = s;
  bad.uniform_time_nodes = 29;
  CHECK_THROWS_AS(Grid{bad}, std::domain_error);
}

TEST_CASE("hat weights reproduce kernel masses and linear functions") {
  const Grid g(smooth_spec());
  const auto& nodes = g.normal();
  for (double tau : {1e-6, 1e-2, 1.0}) {
    for (double x : {0.01, 0.5, 3.0}) {
      const WeightRow w = normal_weights(nodes, x, tau);
      double mass = 0.0;
      double lin = 0.0;
      for (const auto& [m, v] : w) {
        CHECK(v >= 0.0);
        mass += v;
        lin += v * nodes[m];
      }
      CHECK(mass == doctest::Approx(std::erf(x / (2.0 * std::sqrt(tau)))).epsilon(1e-10));
      // y is invariant under the half-line Dirichlet semigroup.
      CHECK(lin == doctest::Approx(x).epsilon(1e-9));
    }
  }
  GridSpec two = smooth_spec();
  two.dim = 2;
  const Grid g2(two);
  double mass = 0.0;
  for (const auto& e : tangential_weights(g2.tangential(), 0.3, 0.05)) mass += e.second;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("erf time moments against quadrature") {
  for (double a : {1e-4, 0.05, 0.5, 3.0}) {
    for (double dt : {1e-3, 0.1, 2.0}) {
      const auto [ma, mb] = erf_time_moments(a, dt);
      const double qa = erf_integral(a, dt, [&](double t) { return 1.0 - t / dt; });
      const double qb = erf_integral(a, dt, [&](double t) { return t / dt; });
      CHECK(ma == doctest::Approx(qa).epsilon(1e-10));
      CHECK(mb == doctest::Approx(qb).epsilon(1e-10));
    }
  }
}

TEST_CASE("Duhamel operator: constant source against the erf history") {
  GridSpec s = smooth_spec();
  s.grading = 1.05;
  s.h_core = 0.01;
  s.normal_core = 3.0;
  const auto g = make_grid(s);
  const DuhamelOperator op(g);
  const SliceValues F = constant_source(*g, 2.0);
  const SliceValues I = op.apply(F);
  double worst = 0.0;
  for (std::size_t k = 5; k < g->times().size(); k += 6) {
    for (double x : {1e-3, 0.1, 0.7, 2.0}) {
      const double expect = 2.0 * erf_history(x, g->times()[k]);
      worst = std::max(worst, std::abs(op.evaluate(F, I, Point{x}, k) / expect - 1.0));
    }
  }
  CHECK(worst < 1e-4);

  // Zero source and boundary vanishing.
  const SliceValues Z = op.apply(constant_source(*g, 0.0));
  for (const auto& sl : Z)
    for (double v : sl) CHECK(v == 0.0);
  const std::size_t k = g->times().size() - 1;
  double prev = 1e300;
  for (double x : {1e-1, 1e-2, 1e-3, 1e-5, 1e-7}) {
    const double v = op.evaluate(F, I, Point{x}, k);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-5);
  CHECK(op.evaluate(F, I, Point{0.0}, k) == 0.0);
  CHECK_THROWS_AS(op.apply(SliceValues(3)), std::invalid_argument);
}

TEST_CASE("Duhamel operator in N = 2 factorises") {
  GridSpec s = smooth_spec(0.1);
  s.dim = 2;
  s.time_nodes = 24;
  s.uniform_time_nodes = 8;
  s.grading = 1.3;
  s.h_core = 0.1;
  const auto g = make_grid(s);
  const DuhamelOperator op(g);
  const SliceValues F = constant_source(*g, 1.0);
  const SliceValues I = op.apply(F);
  const std::size_t k = g->times().size() - 1;
  for (double x : {0.05, 0.3}) {
    const double expect = erf_history(x, 0.1);
    CHECK(op.evaluate(F, I, Point{0.2, x}, k) == doctest::Approx(expect).epsilon(5e-3));
  }
}

TEST_CASE("Picard: zero data, linear hook and monotonicity") {
  const auto g = make_grid(smooth_spec(0.1));
  const DuhamelOperator op(g);
  const auto zero = picard_solve(HalfSpaceMeasure(1), 3.0, op);
  CHECK(zero.status == SolveStatus::CONVERGED);
  CHECK(zero.iterations == 1);
  for (const auto& sl : zero.values)
    for (double v : sl) CHECK(v == 0.0);

  const auto mu = gaussian_measure(Point{1.0}, 0.3, 0.5);
  const SliceValues u0 = linear_evolution(mu, *g);
  PicardCaps lin;
  lin.nonlinear_scale = 0.0;
  const auto u_lin = picard_solve(u0, 3.0, op, lin);
  CHECK(u_lin.status == SolveStatus::CONVERGED);
  CHECK(u_lin.iterations == 1);
  CHECK(u_lin.values == u0);

  const auto u = picard_solve(u0, 3.0, op);
  CHECK(u.status == SolveStatus::CONVERGED);
  CHECK(u.monotonicity_violations == 0);
  for (std::size_t i = 1; i < u.sup_history.size(); ++i) CHECK(u.sup_history[i] >= u.sup_history[i - 1]);
  // u0 <= u everywhere; u <= 2 u0 wherever u0 is resolved (apply_K truncates far tails to 0).
  bool sandwich = true;
  for (std::size_t k = 0; k < u0.size(); ++k) {
    double s0 = 0.0;
    for (double v : u0[k]) s0 = std::max(s0, v);
    for (std::size_t i = 0; i < u0[k].size(); ++i) {
      sandwich = sandwich && u.values[k][i] >= u0[k][i];
      if (u0[k][i] > 1e-8 * s0) sandwich = sandwich && u.values[k][i] <= 2.0 * u0[k][i];
    }
  }
  CHECK(sandwich);
  // Boundary values: first-node value extrapolated to x_N = 0 is small against the slice sup.
  for (std::size_t k = 0; k < u.values.size(); k += 7) {
    const auto& n = g->normal();
    const double v0 = u.values[k][0] - n[0] * (u.values[k][1] - u.values[k][0]) / (n[1] - n[0]);
    CHECK(std::abs(v0) <= 1e-3 * u.slice_sup(k) + 1e-300);
  }
  CHECK_THROWS_AS(picard_solve(u0, 1.0, op), std::domain_error);
}

TEST_CASE("Picard comparison in kappa") {
  const auto g = make_grid(smooth_spec(0.5));
  const DuhamelOperator op(g);
  const auto mu = bump_measure(Point{1.0}, 0.6, 1.0);
  PicardCaps caps;
  caps.max_sweeps = 4;
  const auto a = picard_solve(mu.scaled(1.0), 2.0, op, caps);
  const auto b = picard_solve(mu.scaled(1.3), 2.0, op, caps);
  bool ordered = true;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    for (std::size_t i = 0; i < a.values[k].size(); ++i) ordered = ordered && a.values[k][i] <= b.values[k][i];
  CHECK(ordered);
}

TEST_CASE("boundary atoms: nonexistence above p_2 and small-data existence below") {
  const auto mu = atom_measure(Point{0.0}, 1e-3);
  const GridSpec s = default_grid(mu, 1.0);
  const auto g = make_grid(s);
  const DuhamelOperator op(g);
  const SliceValues u0 = linear_evolution(mu, *g);
  CHECK(picard_solve(u0, 2.5, op).status == SolveStatus::DIVERGED);
  CHECK(picard_solve(u0, 1.5, op).status == SolveStatus::CONVERGED);
}

TEST_CASE("dichotomy argument checks") {
  const SingularProfile prof{ProfileKind::interior_power, Point{2.0}, 4.0};
  CHECK_THROWS_AS(dichotomy_bisect(prof, 5.0, GridSpec{}), std::domain_error);
  DichotomyOptions o;
  o.kappa_max = o.kappa_min;
  CHECK_THROWS_AS(dichotomy_bisect(atom_measure(Point{0.0}, 1.0), 2.0, GridSpec{}, o), std::domain_error);
  // Unbounded support cannot be placed in the box.
  CHECK_THROWS_AS(picard_solve(constant_measure(1, 1.0), 2.0, GridSpec{}), std::domain_error);
}

TEST_CASE("initial trace of the linear evolution") {
  GridSpec s = smooth_spec(0.1);
  s.h_core = 0.01;
  s.grading = 1.1;
  const auto g = make_grid(s);
  const DuhamelOperator op(g);
  const auto mu = bump_measure(Point{1.0}, 0.5, 1.0);
  PicardCaps lin;
  lin.nonlinear_scale = 0.0;
  const auto u = picard_solve(mu, 2.0, op, lin);
  const std::vector<TestFunction> tests{
      [](const Coords&) { return 1.0; },
      [](const Coords& x) { return std::exp(-(x[0] - 1.2) * (x[0] - 1.2)); },
      [](const Coords& x) { return x[0] < 3.0 ? (3.0 - x[0]) * x[0] : 0.0; },
  };
  std::vector<double> times{g->times()[6], g->times()[4], g->times()[2]};
  const auto res = initial_trace(u, tests, times);
  REQUIRE(res.size() == 3);
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const double expect = GK::integrate(
        [&](double y) { return mu.density_at(Coords{y}) * tests[i](Coords{y}); }, 0.5, 1.5, 15, 1e-13);
    CHECK(res[i].limit == doctest::Approx(expect).epsilon(1e-4));
    CHECK_FALSE(res[i].inconclusive);
  }
  // Oscillating pairings are flagged.
  SolutionField wild = u;
  for (std::size_t k = 0; k < 8; ++k)
    for (double& v : wild.values[k]) v *= (k % 2 ? 1.5 : 0.5);
  const auto w = initial_trace(wild, {tests[0]}, {g->times()[6], g->times()[5], g->times()[4], g->times()[3]});
  CHECK(w[0].inconclusive);
  const auto z = initial_trace(picard_solve(HalfSpaceMeasure(1), 2.0, op), tests, times);
  for (const auto& r : z) CHECK(r.limit == 0.0);
  CHECK_THROWS_AS(initial_trace(u, tests, {0.123456}), std::invalid_argument);
}

TEST_CASE("global probe bookkeeping") {
  const auto rep = global_existence_probe(HalfSpaceMeasure(1), 2.0, {1.0, 10.0}, smooth_spec());
  CHECK(rep.trend == "converges-at-all-horizons");
  CHECK(rep.largest_converged == 10.0);
  CHECK_THROWS_AS(global_existence_probe(HalfSpaceMeasure(1), 2.0, {10.0, 1.0}, smooth_spec()), std::domain_error);
}
