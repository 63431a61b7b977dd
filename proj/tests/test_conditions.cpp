#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "halfheat/conditions.hpp"
#include "fixtures.hpp"
#include "halfheat/sampling.hpp"

using namespace halfheat;

namespace {

constexpr auto OBSTRUCTED = ConditionVerdict::OBSTRUCTED_NONEXISTENCE;
constexpr auto UNOBSTRUCTED = ConditionVerdict::UNOBSTRUCTED;

double max_over_min(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

SingularProfile profile(ProfileKind kind, const Point& c, double p) { return SingularProfile{kind, c, p}; }

/// x_N |x - z|^{-N} |log |x - z||^{-b} on B(z, 1/2): a Radon measure whose log decay is too weak at p_N.
HalfSpaceMeasure weak_log_measure(const Point& z, double b) {
  const int n = z.dim();
  auto phi = [n, b](double r) {
    if (r >= 0.5 || r == 0.0) return 0.0;
    return std::pow(r, -n) * std::pow(-std::log(r), -b);
  };
  return HalfSpaceMeasure(n).with_weighted_density(
      Density::radial(n, z.raw(), phi, 0.5, Singularity{z.raw(), static_cast<double>(n), b}));
}

}  // namespace

TEST_CASE("ball condition: bounded density is unobstructed and scale invariant") {
  const auto mu = bump_measure(Point{0.0, 1.0}, 0.5, 1.0);
  const auto r1 = check_ball_condition(mu, 3.0, 1.0);
  CHECK(r1.verdict == UNOBSTRUCTED);
  // R ~ sigma^{2/(p-1)} for bounded f.
  CHECK(r1.growth_exponent == doctest::Approx(1.0).epsilon(0.05));
  const auto r10 = check_ball_condition(mu.scaled(10.0), 3.0, 1.0);
  CHECK(r10.verdict == r1.verdict);
  CHECK(r10.growth_exponent == doctest::Approx(r1.growth_exponent).epsilon(1e-9));
  CHECK(r10.sup_estimate == doctest::Approx(10.0 * r1.sup_estimate).epsilon(1e-9));
}

TEST_CASE("ball condition: over-singular power profile is obstructed") {
  const Point z{1.0};
  const double pprime = 5.0;
  const auto mu = make_profile(profile(ProfileKind::interior_power, z, pprime), 1.0);
  for (double p : {7.0, 9.0}) {
    const auto r = check_ball_condition(mu, p, 1.0);
    CHECK(r.verdict == OBSTRUCTED);
    const double expected = 2.0 / (p - 1.0) - 2.0 / (pprime - 1.0);
    CHECK(r.growth_exponent == doctest::Approx(expected).epsilon(0.05));
  }
  // At p = p' the ratio is flat and at p < p' it decays.
  CHECK(check_ball_condition(mu, 5.0, 1.0).verdict == UNOBSTRUCTED);
  CHECK(check_ball_condition(mu, 3.0, 1.0).verdict == UNOBSTRUCTED);
}

TEST_CASE("ball condition: boundary atom above p_{N+1}") {
  for (int n : {1, 2}) {
    const auto mu = atom_measure(Point::origin(n), 2.0);
    const double p = 4.0;
    const auto r = check_ball_condition(mu, p, 1.0);
    CHECK(r.verdict == OBSTRUCTED);
    CHECK(r.growth_exponent == doctest::Approx(-(n + 1.0) + 2.0 / (p - 1.0)).epsilon(0.02));
  }
  // Below p_{N+1} the atom is admissible.
  CHECK(check_ball_condition(atom_measure(Point{0.0}, 1.0), 1.5, 1.0).verdict == UNOBSTRUCTED);
}

TEST_CASE("ball condition: errors") {
  const auto mu = bump_measure(Point{1.0}, 0.5, 1.0);
  CHECK_THROWS_AS(check_ball_condition(mu, 2.0, 1.0, SampleGrid{}), std::domain_error);
  CHECK_THROWS_AS(check_ball_condition(mu, 2.0, 1.0, SampleGrid{{Point{1.0}}, {}}), std::domain_error);
  CHECK_THROWS_AS(check_ball_condition(mu, 2.0, 1.0, SampleGrid{{Point{1.0}}, {1e-3, 2e-3}}), std::domain_error);
  CHECK_THROWS_AS(check_ball_condition(mu, 1.0, 1.0), std::domain_error);
  const auto r = check_ball_condition(mu, 2.0, 1.0, SampleGrid{{Point{1.0}}, geometric_radii(1e-4, 1e-2)});
  CHECK(r.verdict == UNOBSTRUCTED);
  CHECK(r.samples.size() == r.sigmas.size());
}

TEST_CASE("log condition at p_N") {
  const Point z{0.0, 1.0};
  SUBCASE("bounded density decays") {
    const auto r = check_log_condition_pN(bump_measure(z, 0.5, 1.0), 1.0);
    CHECK(r.verdict == UNOBSTRUCTED);
    CHECK(r.sup_by_sigma.front() < r.sup_by_sigma.back());
  }
  SUBCASE("critical log profile stays bounded") {
    for (int n : {1, 2}) {
      const Point c = n == 1 ? Point{1.0} : z;
      const auto mu = make_profile(profile(ProfileKind::interior_log, c, fujita_exponent(n)), 1.0);
      const auto r = check_log_condition_pN(mu, 1.0);
      CHECK(r.verdict == UNOBSTRUCTED);
      CHECK(max_over_min(r.sup_by_sigma) < 3.0);
    }
  }
  SUBCASE("weaker log decay diverges") {
    for (int n : {1, 2}) {
      const Point c = n == 1 ? Point{1.0} : z;
      const auto r = check_log_condition_pN(weak_log_measure(c, 1.0 + n / 4.0), 1.0);
      CHECK(r.verdict == OBSTRUCTED);
      CHECK(r.growth_exponent > 0.1);
    }
  }
  SUBCASE("centers too close to the boundary") {
    SampleGrid g{{Point{0.0, 1e-3}}, geometric_radii(1e-6, 1e-2)};
    CHECK_THROWS_AS(check_log_condition_pN(bump_measure(z, 0.5, 1.0), 1.0, g), std::domain_error);
  }
}

TEST_CASE("log condition at p_{N+1}") {
  SUBCASE("boundary atom diverges") {
    for (int n : {1, 2}) {
      const auto r = check_log_condition_pN1(atom_measure(Point::origin(n), 3.0), 1.0);
      CHECK(r.verdict == OBSTRUCTED);
      // M = kappa [log(e + sqrt T / sigma)]^{(N+1)/2} exactly.
      CHECK(r.growth_exponent == doctest::Approx((n + 1.0) / 2.0).epsilon(1e-6));
    }
  }
  SUBCASE("bounded density decays") {
    CHECK(check_log_condition_pN1(bump_measure(Point{0.0, 0.5}, 0.4, 1.0), 1.0).verdict == UNOBSTRUCTED);
  }
  SUBCASE("critical boundary log profile stays bounded") {
    for (int n : {1, 2}) {
      const auto mu = make_profile(profile(ProfileKind::boundary_log, Point::origin(n), fujita_exponent(n + 1)), 1.0);
      const auto r = check_log_condition_pN1(mu, 1.0);
      CHECK(r.verdict == UNOBSTRUCTED);
      CHECK(max_over_min(r.sup_by_sigma) < 3.0);
    }
  }
  SUBCASE("interior centers rejected") {
    SampleGrid g{{Point{0.0, 0.5}}, geometric_radii(1e-6, 1e-2)};
    CHECK_THROWS_AS(check_log_condition_pN1(atom_measure(Point{0.0, 0.0}, 1.0), 1.0, g), std::domain_error);
  }
}

TEST_CASE("boundary mass") {
  const auto atom = atom_measure(Point{0.0}, 1.0);
  CHECK(check_boundary_mass(atom, 2.0).verdict == OBSTRUCTED);
  CHECK(check_boundary_mass(atom, 1.5).verdict == UNOBSTRUCTED);
  CHECK(check_boundary_mass(atom, 1.5).sup_estimate == doctest::Approx(1.0));
  const auto interior = bump_measure(Point{0.0, 1.0}, 0.5, 1.0);
  const auto r = check_boundary_mass(interior, 5.0);
  CHECK(r.verdict == UNOBSTRUCTED);
  CHECK(r.sup_estimate == 0.0);
  CHECK_THROWS_AS(check_boundary_mass(atom, 1.0), std::domain_error);
}

TEST_CASE("global growth") {
  SUBCASE("compact bounded density") {
    const auto r = check_global_growth(bump_measure(Point{0.0, 1.0}, 0.5, 1.0), 1.2);
    CHECK(r.verdict == UNOBSTRUCTED);
    CHECK(r.sup_estimate > 0.0);
  }
  SUBCASE("boundary atom below p_{N+1}") {
    const auto r = check_global_growth(atom_measure(Point{0.0}, 2.5), 1.5);
    CHECK(r.verdict == UNOBSTRUCTED);
    CHECK(r.sup_estimate == doctest::Approx(2.5));
  }
  SUBCASE("superlinear mass growth in the tangential directions") {
    Density g(2, [](const Coords& x) { return 1.0 + std::hypot(x[0], x[1]); });
    const auto r = check_global_growth(HalfSpaceMeasure(2).with_interior_density(g), 1.3);
    CHECK(r.verdict == OBSTRUCTED);
    CHECK(r.growth_exponent == doctest::Approx(1.0).epsilon(0.15));
  }
  SUBCASE("exponent range") {
    const auto atom = atom_measure(Point{0.0}, 1.0);
    CHECK_THROWS_AS(check_global_growth(atom, 2.5), std::domain_error);
    // Away from the boundary the range extends to p_N = 3 in N = 1.
    const auto inner = atom_measure(Point{2.0}, 1.0);
    CHECK(check_global_growth(inner, 2.5).verdict == UNOBSTRUCTED);
    CHECK_THROWS_AS(check_global_growth(inner, 3.0), std::domain_error);
  }
}

TEST_CASE("classifier") {
  for (double p : {2.0, 3.0, 5.0}) {
    const auto c = classify_measure(atom_measure(Point{0.0, 0.0}, 0.01), p, 1.0);
    CHECK(c.verdict == OBSTRUCTED);
    // Above 2 the ball condition at the boundary center diverges as well.
    if (p > 2.0) CHECK(c.reports[1].verdict == OBSTRUCTED);
  }
  const auto bump = classify_measure(bump_measure(Point{0.0, 1.0}, 0.5, 1.0), 2.0, 1.0);
  CHECK(bump.verdict == UNOBSTRUCTED);
  CHECK(bump.reports.size() == 3);  // p = 2 = p_N in N = 2 adds the log condition
  CHECK(bump.reports[2].which == ConditionTag::log_interior);
  const auto crit = classify_measure(atom_measure(Point{0.0}, 1.0), 2.0, 1.0);
  CHECK(crit.verdict == OBSTRUCTED);
  CHECK(crit.reports.back().which == ConditionTag::log_boundary);
}

TEST_CASE("thread count does not change results") {
  const auto mu = make_profile(profile(ProfileKind::interior_power, Point{0.0, 1.0}, 3.0), 1.0);
  ConditionOptions one;
  ConditionOptions four;
  four.threads = 4;
  const auto a = check_ball_condition(mu, 4.0, 1.0, {}, one);
  const auto b = check_ball_condition(mu, 4.0, 1.0, {}, four);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].value == b.samples[i].value);
  CHECK(a.growth_exponent == b.growth_exponent);
}

TEST_CASE("classifier fixture suite") {
  int misclassified = 0;
  for (const auto& c : fixtures::classifier_cases()) {
    const auto rep = classify_measure(c.mu, c.p, c.T);
    bool decisive_ok = false;
    for (const auto& r : rep.reports)
      if (r.which == c.decisive) decisive_ok = r.verdict == c.expected;
    INFO(c.name);
    CHECK(rep.verdict == c.expected);
    CHECK(decisive_ok);
    if (rep.verdict != c.expected || !decisive_ok) ++misclassified;
  }
  CHECK(misclassified == 0);
}

TEST_CASE("blow-up rate functionals") {
  GridSpec spec;
  spec.dim = 1;
  spec.T = 1.0;
  spec.t_min_ratio = 1e-4;
  spec.time_nodes = 12;
  spec.uniform_time_nodes = 4;
  spec.h_core = 0.05;
  spec.grading = 1.2;
  auto grid = std::make_shared<Grid>(spec);

  SUBCASE("zero field") {
    SolutionField u;
    u.grid = grid;
    u.p = 3.0;
    u.values.assign(grid->times().size(), std::vector<double>(grid->nodes_per_slice(), 0.0));
    const auto rates = blow_up_rate_functionals(u, 2.0);
    CHECK(rates.size() == 2 * grid->times().size());
    for (const auto& r : rates) CHECK(r.value == 0.0);
  }
  SUBCASE("linear evolution of a small bump") {
    const auto mu = bump_measure(Point{1.0}, 0.5, 1e-3);
    SolutionField u;
    u.grid = grid;
    u.p = 3.0;
    u.values = linear_evolution(mu, *grid);
    const auto rates = blow_up_rate_functionals(u, 2.0);
    double first_interior = 0.0, first_boundary = 0.0;
    for (const auto& r : rates) {
      double& first = r.kind == RateKind::interior ? first_interior : first_boundary;
      if (first == 0.0) first = r.ratio;
      CHECK(r.ratio > 0.0);
      CHECK(r.ratio <= 2.0 * first);
      if (r.kind == RateKind::interior) CHECK(r.x.normal() >= std::sqrt(2.0 - r.t) - 1e-12);
      else CHECK(r.x.normal() == 0.0);
    }
  }
  SUBCASE("times at or past T") {
    SolutionField u;
    u.grid = grid;
    u.p = 3.0;
    u.values.assign(grid->times().size(), std::vector<double>(grid->nodes_per_slice(), 0.0));
    CHECK_THROWS_AS(blow_up_rate_functionals(u, 0.5, {0.5}), std::domain_error);
    CHECK_THROWS_AS(blow_up_rate_functionals(u, 0.5, {grid->times().back()}), std::domain_error);
  }
}
