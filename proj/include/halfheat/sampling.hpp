#pragma once

// Sample sets for grid sups of ball functionals over centers z and radii sigma.

#include <vector>

#include "halfheat/measures.hpp"

namespace halfheat {

/// Uniform per_axis^N grid over the bounding box of supp mu (a box of half-width `box` about the
/// origin when the support is unbounded), plus atoms, singular centers and small normal offsets
/// from each singular center.
std::vector<Point> sample_centers(const HalfSpaceMeasure& mu, int per_axis = 9, double box = 4.0);

/// lo, lo*ratio, ... up to and including hi (the last step may be shorter).
std::vector<double> geometric_radii(double lo, double hi, double ratio = 2.0);

}  // namespace halfheat
