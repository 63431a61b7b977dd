#pragma once

// Known measure families with their expected classifier verdicts, shared by the unit and acceptance suites.

#include <string>
#include <vector>

#include "halfheat/conditions.hpp"

namespace halfheat::fixtures {

struct ClassifierCase {
  std::string name;
  HalfSpaceMeasure mu;
  double p;
  double T;
  ConditionVerdict expected;
  /// The check that must carry the verdict.
  ConditionTag decisive;
};

inline std::vector<ClassifierCase> classifier_cases() {
  constexpr auto OBS = ConditionVerdict::OBSTRUCTED_NONEXISTENCE;
  constexpr auto OK = ConditionVerdict::UNOBSTRUCTED;
  auto power = [](const Point& c, double p) {
    return make_profile(SingularProfile{ProfileKind::interior_power, c, p}, 1.0);
  };
  return {
      {"boundary atom N=1 p=2", atom_measure(Point{0.0}, 1.0), 2.0, 1.0, OBS, ConditionTag::boundary_mass},
      {"boundary atom N=1 p=3", atom_measure(Point{0.0}, 0.1), 3.0, 1.0, OBS, ConditionTag::boundary_mass},
      {"boundary atom N=2 p=2.5", atom_measure(Point{0.0, 0.0}, 1.0), 2.5, 1.0, OBS, ConditionTag::boundary_mass},
      {"boundary atom N=1 p=4 ball", atom_measure(Point{0.0}, 1.0), 4.0, 1.0, OBS, ConditionTag::ball},
      {"boundary atom N=2 p=2 ball", atom_measure(Point{0.5, 0.0}, 1.0), 2.0, 1.0, OBS, ConditionTag::ball},
      {"boundary atom N=1 p=1.5", atom_measure(Point{0.0}, 1.0), 1.5, 1.0, OK, ConditionTag::ball},
      {"interior power p'=5 at p=7 N=1", power(Point{1.0}, 5.0), 7.0, 1.0, OBS, ConditionTag::ball},
      {"interior power p'=3 at p=5 N=2", power(Point{0.0, 1.0}, 3.0), 5.0, 1.0, OBS, ConditionTag::ball},
      {"interior atom N=1 p=4", atom_measure(Point{1.0}, 0.01), 4.0, 1.0, OBS, ConditionTag::ball},
      {"bump N=1 p=2", bump_measure(Point{1.0}, 0.5, 3.0), 2.0, 1.0, OK, ConditionTag::ball},
      {"bump N=2 p=3", bump_measure(Point{0.0, 1.0}, 0.5, 1.0), 3.0, 1.0, OK, ConditionTag::ball},
      {"gaussian N=1 p=5", gaussian_measure(Point{0.8}, 0.3, 2.0), 5.0, 0.5, OK, ConditionTag::ball},
  };
}

}  // namespace halfheat::fixtures
