#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "halfheat/solver.hpp"
#include "halfheat/supersolutions.hpp"

using namespace halfheat;

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

double gamma1(double x, double t) { return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t); }

GridSpec small_spec(double T = 1.0) {
  GridSpec g;
  g.T = T;
  g.t_min_ratio = 1e-6;
  g.time_nodes = 16;
  g.uniform_time_nodes = 6;
  g.h_core = 0.1;
  g.grading = 1.3;
  return g;
}

HalfSpaceMeasure line_bump(int n, double amplitude, double radius) {
  const Coords c{};
  auto phi = [amplitude, radius](double r) {
    if (r >= radius) return 0.0;
    const double q = r / radius;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - q * q));
  };
  return HalfSpaceMeasure(n).with_boundary_line(Density::radial(n - 1, c, phi, radius));
}

double max_over_min(const std::vector<double>& v) {
  double lo = v.front(), hi = v.front();
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return hi / lo;
}

}  // namespace

TEST_CASE("identity gauge gives v = 2 K mu and w = 2 K of the boundary atom") {
  const auto mu = gaussian_measure(Point{1.0}, 0.3, 0.7).with_atom(Point{0.0}, 0.4);
  const auto cand = build_phi_supersolution(mu, ConvexGauge::identity(), 1.5);
  const auto bump = gaussian_measure(Point{1.0}, 0.3, 0.7);
  const auto atom = atom_measure(Point{0.0}, 0.4);
  for (double x : {0.05, 0.5, 1.0, 2.2})
    for (double t : {1e-3, 0.1, 1.0}) {
      CHECK(cand.v(Point{x}, t) == doctest::Approx(2.0 * apply_K(bump, Point{x}, t)).epsilon(1e-12));
      CHECK(cand.w(Point{x}, t) == doctest::Approx(2.0 * apply_K(atom, Point{x}, t)).epsilon(1e-12));
    }
  CHECK(cand(Point{0.0}, 0.5) == 0.0);
}

TEST_CASE("unit boundary line in N = 2 gives w = 2 (x_N / t) Gamma_1") {
  HalfSpaceMeasure mu(2);
  mu = mu.with_boundary_line(Density(1, [](const Coords&) { return 1.0; }));
  const auto cand = build_phi_supersolution(mu, ConvexGauge::identity(), 1.5);
  for (double x1 : {-3.0, 0.0, 1.7})
    for (double xn : {0.1, 0.8})
      for (double t : {0.01, 1.0}) {
        CHECK(cand.w(Point{x1, xn}, t) == doctest::Approx(2.0 * xn / t * gamma1(xn, t)).epsilon(1e-8));
        CHECK(cand.v(Point{x1, xn}, t) == 0.0);
      }
}

TEST_CASE("power gauge on a radial power profile matches 2 [G(t) f^alpha]^{1/alpha}") {
  const double p = 4.0, alpha = 1.2;
  const auto mu = make_profile({ProfileKind::interior_power, Point{2.0}, p}, 0.8);
  const auto cand = build_phi_supersolution(mu, ConvexGauge::power(alpha), p);
  // f^alpha = 0.8^alpha r^{-0.8} on |y - 2| < 1; y = 2 +- u^5 removes the singularity.
  for (double x : {1.5, 2.0, 2.7})
    for (double t : {0.01, 0.3}) {
      double total = 0.0;
      for (double sgn : {-1.0, 1.0}) {
        auto g = [&](double u) {
          if (u == 0.0) return 0.0;
          const double y = 2.0 + sgn * std::pow(u, 5);
          const double G = gamma1(x - y, t) - gamma1(x + y, t);
          return 5.0 * std::pow(0.8, alpha) * G;
        };
        total += GK::integrate(g, 0.0, 0.5, 20, 1e-13) + GK::integrate(g, 0.5, 1.0, 20, 1e-13);
      }
      CHECK(cand.v(Point{x}, t) == doctest::Approx(2.0 * std::pow(total, 1.0 / alpha)).epsilon(1e-6));
    }
}

TEST_CASE("K mu <= (v + w) / 2 at grid nodes for every gauge") {
  const auto mu = gaussian_measure(Point{0.8}, 0.25, 1.3).with_atom(Point{0.0}, 0.5);
  const Grid grid(small_spec());
  for (const auto& g : {ConvexGauge::identity(), ConvexGauge::power(2.0), ConvexGauge::power(3.5),
                        ConvexGauge::log_type(1.0), ConvexGauge::shifted_log(2.0, 50.0)}) {
    const auto cand = build_phi_supersolution(mu, g, 1.5);
    for (double t : {grid.times()[2], grid.times()[8], grid.times().back()})
      for (std::size_t i = 0; i < grid.nodes_per_slice(); i += 3) {
        const Point x = grid.node(i);
        CHECK(apply_K(mu, x, t) <= 0.5 * cand(x, t) * (1.0 + 1e-8) + 1e-300);
      }
  }
}

TEST_CASE("supersolution builder argument errors") {
  const auto atom = atom_measure(Point{0.0}, 1.0);
  CHECK_THROWS_AS(build_phi_supersolution(atom, ConvexGauge::identity(), 2.0), std::domain_error);
  CHECK_THROWS_AS(build_phi_supersolution(constant_measure(1, 1.0, Point{1.0}, 0.5), ConvexGauge::identity(), 3.0),
                  std::domain_error);
  CHECK_THROWS_AS(build_phi_supersolution(atom_measure(Point{0.5}, 1.0), ConvexGauge::identity(), 1.5),
                  std::domain_error);
  CHECK_THROWS_AS(build_phi_supersolution(atom, ConvexGauge::identity(), 1.0), std::domain_error);
}

TEST_CASE("explicit-threshold conditions: zero data, exact boundary constant, interior scaling") {
  SUBCASE("zero data") {
    const auto r = gauge_threshold_conditions(HalfSpaceMeasure(1), ConvexGauge::power(2.0), 3.0, 1.0);
    CHECK(r.interior_lhs == 0.0);
    CHECK(r.boundary_lhs == 0.0);
    CHECK(r.interior_pass);
    CHECK(r.boundary_pass);
    CHECK(r.interior_threshold == doctest::Approx(std::pow(2.0, -5.0)));
    CHECK(r.boundary_threshold ==
          doctest::Approx(std::pow(2.0, -5.0) * std::pow(2.0 * std::numbers::e * std::numbers::pi, 1.0)));
  }
  SUBCASE("N = 1 atom: B(Phi(k)) int_0^T s^{1-p} A(Phi(k)) ds = k^{p-1} T^{2-p} / (2-p)") {
    const double k = 0.3, T = 2.0;
    const Grid grid(small_spec(T));
    for (double p : {1.3, 1.5, 1.8})
      for (const auto& g : {ConvexGauge::identity(), ConvexGauge::power(1.3), ConvexGauge::log_type(0.7)}) {
        const auto cand = build_phi_supersolution(atom_measure(Point{0.0}, k), g, p);
        const auto r = gauge_threshold_conditions(cand, grid);
        CHECK(r.boundary_lhs == doctest::Approx(std::pow(k, p - 1.0) * std::pow(T, 2.0 - p) / (2.0 - p)).epsilon(1e-9));
        CHECK(r.interior_lhs == 0.0);
      }
  }
  SUBCASE("interior LHS scales like eps^{p-1}") {
    const double p = 4.0;
    const auto unit = gaussian_measure(Point{1.0}, 0.3, 1.0);
    const Grid grid(default_grid(unit, 1.0));
    std::vector<double> lx, ly;
    for (double eps : {1.0, 0.5, 0.25}) {
      const auto r = gauge_threshold_conditions(build_phi_supersolution(unit.scaled(eps), ConvexGauge::power(2.0), p), grid);
      REQUIRE(r.interior_lhs > 0.0);
      lx.push_back(std::log(eps));
      ly.push_back(std::log(r.interior_lhs));
    }
    const double slope1 = (ly[1] - ly[0]) / (lx[1] - lx[0]);
    const double slope2 = (ly[2] - ly[1]) / (lx[2] - lx[1]);
    CHECK(slope1 == doctest::Approx(p - 1.0).epsilon(0.05));
    CHECK(slope2 == doctest::Approx(p - 1.0).epsilon(0.05));
  }
  SUBCASE("boundary line in N = 2, 1 < p < 2: finite boundary LHS with eps^{p-1} scaling") {
    const double p = 1.5;
    const auto h1 = line_bump(2, 1.0, 0.5);
    GridSpec g = small_spec();
    g.dim = 2;
    const Grid grid(g);
    const auto a = gauge_threshold_conditions(build_phi_supersolution(h1, ConvexGauge::power(1.2), p), grid);
    const auto b = gauge_threshold_conditions(build_phi_supersolution(h1.scaled(0.25), ConvexGauge::power(1.2), p), grid);
    CHECK(std::isfinite(a.boundary_lhs));
    CHECK(a.boundary_lhs > 0.0);
    CHECK(std::log(a.boundary_lhs / b.boundary_lhs) / std::log(4.0) == doctest::Approx(p - 1.0).epsilon(0.05));
  }
}

TEST_CASE("verify_supersolution on the Gaussian bump family") {
  const auto unit = gaussian_measure(Point{1.0}, 0.3, 1.0);
  const auto grid = std::make_shared<const Grid>(default_grid(unit, 1.0));
  const DuhamelOperator op(grid);
  const double p = 3.0;

  SUBCASE("twice the linear evolution of tiny data passes") {
    const auto mu = unit.scaled(1e-2);
    const auto rep = verify_supersolution([&](const Point& x, double t) { return 2.0 * apply_K(mu, x, t); }, mu, p, op);
    CHECK(rep.pass);
    CHECK(rep.fraction_below == 0.0);
    CHECK(rep.tol_margin == doctest::Approx(1e-3 * rep.candidate_sup));
  }
  SUBCASE("the linear evolution itself fails") {
    const auto rep = verify_supersolution([&](const Point& x, double t) { return apply_K(unit, x, t); }, unit, p, op);
    CHECK_FALSE(rep.pass);
    CHECK(rep.min_defect < -rep.tol_margin);
    CHECK(rep.fraction_below > 0.0);
  }
  SUBCASE("zero candidate for zero data passes with D = 0") {
    const auto rep = verify_supersolution([](const Point&, double) { return 0.0; }, HalfSpaceMeasure(1), p, op);
    CHECK(rep.pass);
    CHECK(rep.min_defect == 0.0);
    CHECK(rep.candidate_sup == 0.0);
  }
  SUBCASE("non-finite candidate is rejected") {
    CHECK_THROWS_AS(
        verify_supersolution([](const Point&, double) { return std::nan(""); }, HalfSpaceMeasure(1), p, op),
        std::domain_error);
  }
  SUBCASE("gauge candidate of small data passes and bounds the Picard solution") {
    const double q = 4.0;
    const auto mu = unit.scaled(0.2);
    const auto cand = build_phi_supersolution(mu, ConvexGauge::power(2.0), q);
    const auto values = sample_field(cand.evaluator(), *grid);
    const auto lin = linear_evolution(mu, *grid);
    CHECK(verify_supersolution(values, lin, q, op).pass);
    const auto u = picard_solve(lin, q, op);
    REQUIRE(u.status == SolveStatus::CONVERGED);
    // v vanishes identically beyond the kernel truncation while u keeps tiny Duhamel tails there.
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double floor = 1e-12 * *std::max_element(values[k].begin(), values[k].end());
      for (std::size_t i = 0; i < values[k].size(); ++i) CHECK(u.values[k][i] <= values[k][i] * (1.0 + 1e-6) + floor);
    }
  }
}

TEST_CASE("ball smallness calibration: small functional values certify 2 K mu") {
  for (double width : {0.15, 0.3, 0.6}) {
    const auto unit = gaussian_measure(Point{1.0}, width, 1.0);
    const auto grid = std::make_shared<const Grid>(default_grid(unit, 1.0));
    const DuhamelOperator op(grid);
    const auto lin = linear_evolution(unit, *grid);
    for (double p : {1.5, 2.0, 3.0, 5.0})
      for (double amp : {0.05, 0.2, 0.5, 1.0, 2.0}) {
        const double th = ball_integral_smallness(unit.scaled(amp), p, 1.0).value;
        if (!(th < kBallSmallnessCalibrated)) continue;
        SliceValues l = lin, c = lin;
        for (auto& s : l)
          for (auto& v : s) v *= amp;
        for (auto& s : c)
          for (auto& v : s) v *= 2.0 * amp;
        INFO("width=" << width << " p=" << p << " amp=" << amp << " ball smallness=" << th);
        CHECK(verify_supersolution(c, l, p, op).pass);
      }
  }
}

TEST_CASE("ball smallness functional: zero, atoms, bounded data, monotonicity") {
  CHECK(ball_integral_smallness(HalfSpaceMeasure(1), 2.0, 1.0).value == 0.0);

  SUBCASE("boundary atom above p_{N+1} is flagged infinite with slope -(N+1)(p-1)/2") {
    const auto r = ball_integral_smallness(atom_measure(Point{0.0}, 0.5), 2.5, 1.0);
    CHECK(r.infinite);
    CHECK(r.small_s_slope == doctest::Approx(-1.5).epsilon(1e-6));
    const auto r2 = ball_integral_smallness(atom_measure(Point{0.0, 0.0}, 0.5), 1.8, 1.0);
    CHECK(r2.infinite);
    CHECK(r2.small_s_slope == doctest::Approx(-1.2).epsilon(1e-6));
  }
  SUBCASE("boundary atom below p_{N+1}: k^{p-1} T^{2-p} / (2-p)") {
    for (double T : {0.1, 1.0}) {
      const auto r = ball_integral_smallness(atom_measure(Point{0.0}, 0.5), 1.5, T);
      CHECK_FALSE(r.infinite);
      CHECK(r.value == doctest::Approx(std::pow(0.5, 0.5) * std::pow(T, 0.5) / 0.5).epsilon(1e-9));
    }
  }
  SUBCASE("bounded compact data: finite and vanishing as T -> 0") {
    const auto mu = bump_measure(Point{1.0}, 0.5, 1.0);
    const auto a = ball_integral_smallness(mu, 1.5, 1.0);
    const auto b = ball_integral_smallness(mu, 1.5, 0.01);
    CHECK_FALSE(a.infinite);
    CHECK(a.value > 0.0);
    CHECK(b.value < 0.2 * a.value);
  }
  SUBCASE("nondecreasing under mu -> kappa mu") {
    const auto mu = gaussian_measure(Point{0.5}, 0.3, 1.0).with_atom(Point{0.0}, 0.1);
    double prev = 0.0;
    for (double k : {1.0, 1.5, 3.0}) {
      const double v = ball_integral_smallness(mu.scaled(k), 1.5, 1.0).value;
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("power gauge functional") {
  CHECK_THROWS_AS(power_gauge_smallness(bump_measure(Point{1.0}, 0.5, 1.0), 1.0, 3.0, 1.0), std::domain_error);

  SUBCASE("interior power profile at its own p: ratio flat in sigma") {
    const double p = 4.0;
    const auto mu = make_profile({ProfileKind::interior_power, Point{2.0}, p}, 1.0);
    SmallnessOptions o;
    o.sigma_min_ratio = 1e-3;
    const auto [in, bd] = power_gauge_smallness(mu, 1.1, p, 0.01, o);
    CHECK(std::abs(in.slope) < 0.02);
    CHECK(bd.sup == 0.0);
  }
  SUBCASE("bounded compact f: ratio vanishes as sigma -> 0") {
    const auto [in, bd] = power_gauge_smallness(bump_measure(Point{1.0}, 0.5, 1.0), 2.0, 4.0, 0.01);
    CHECK(in.ratios.front() < 1e-2 * in.ratios.back());
    CHECK(in.slope == doctest::Approx(4.0 / 3.0).epsilon(0.02));
  }
  SUBCASE("boundary-line power profile with p_{N+1} < p < 2: ratio flat in sigma") {
    const double p = 1.8;
    const auto mu = make_profile({ProfileKind::boundary_line_power, Point{0.0, 0.0}, p}, 1.0);
    const auto [in, bd] = power_gauge_smallness(mu, 1.05, p, 0.01);
    CHECK(in.sup == 0.0);
    CHECK(std::abs(bd.slope) < 0.02);
  }
  SUBCASE("nondecreasing under mu -> kappa mu") {
    const auto mu = bump_measure(Point{1.0}, 0.5, 1.0);
    const auto a = power_gauge_smallness(mu, 2.0, 4.0, 1.0).first.sup;
    const auto b = power_gauge_smallness(mu.scaled(2.0), 2.0, 4.0, 1.0).first.sup;
    CHECK(b == doctest::Approx(4.0 * a).epsilon(1e-9));
  }
}

TEST_CASE("log gauge functional") {
  const auto zero = HalfSpaceMeasure(1);
  CHECK(log_gauge_smallness(zero, 0.25, 0.0, 3.0, 1.0).sup == 0.0);
  CHECK_THROWS_AS(log_gauge_smallness(zero, 0.25, 0.0, 2.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(log_gauge_smallness(zero, 0.25, 1.5, 2.0, 1.0), std::domain_error);

  SUBCASE("interior log profile at p_N, ell = 0: bounded ratio") {
    const auto mu = make_profile({ProfileKind::interior_log, Point{1.0}, 3.0}, 1.0);
    const auto r = log_gauge_smallness(mu, 0.25, 0.0, 3.0, 0.01);
    CHECK(r.sup > 0.0);
    CHECK(max_over_min(r.ratios) < 3.0);
  }
  SUBCASE("boundary log profile at p_{N+1}, ell = 1: bounded ratio") {
    const auto mu = make_profile({ProfileKind::boundary_log, Point{0.0}, 2.0}, 1.0);
    const auto r = log_gauge_smallness(mu, 0.25, 1.0, 2.0, 0.01);
    CHECK(r.sup > 0.0);
    CHECK(max_over_min(r.ratios) < 3.0);
  }
  SUBCASE("nondecreasing under mu -> kappa mu") {
    const auto mu = make_profile({ProfileKind::interior_log, Point{1.0}, 3.0}, 1.0);
    CHECK(log_gauge_smallness(mu.scaled(2.0), 0.25, 0.0, 3.0, 0.01).sup >= log_gauge_smallness(mu, 0.25, 0.0, 3.0, 0.01).sup);
  }
}

TEST_CASE("boundary log gauge functional") {
  CHECK_THROWS_AS(boundary_log_gauge_smallness(atom_measure(Point{0.0}, 1.0), 0.5, 2.0, 1.0), std::domain_error);
  const double p = fujita_exponent(3);
  CHECK(boundary_log_gauge_smallness(HalfSpaceMeasure(2), 0.5, p, 1.0).sup == 0.0);
  CHECK_THROWS_AS(boundary_log_gauge_smallness(HalfSpaceMeasure(2), 0.5, 1.5, 1.0), std::domain_error);

  SUBCASE("boundary-line log profile: bounded ratio") {
    const auto mu = make_profile({ProfileKind::boundary_line_log, Point{0.0, 0.0}, p}, 1.0);
    const auto r = boundary_log_gauge_smallness(mu, 0.5, p, 0.01);
    CHECK(r.sup > 0.0);
    CHECK(max_over_min(r.ratios) < 3.0);
  }
  SUBCASE("bounded compact h: ratio vanishes as sigma -> 0") {
    SmallnessOptions o;
    o.sigma_min_ratio = 1e-4;
    const auto r = boundary_log_gauge_smallness(line_bump(2, 1.0, 0.5), 0.5, p, 0.01, o);
    CHECK(r.ratios.front() < 1e-2 * r.ratios.back());
  }
}
