#include "halfheat/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace halfheat {

std::vector<Point> sample_centers(const HalfSpaceMeasure& mu, int per_axis, double box) {
  if (per_axis < 1) throw std::domain_error("sample_centers: per_axis must be >= 1");
  if (!(box > 0.0)) throw std::domain_error("sample_centers: box must be positive");
  const int n = mu.dim();
  Coords lo{};
  Coords hi{};
  bool any = false;
  auto extend = [&](const Coords& c, double r, bool boundary_only) {
    for (int i = 0; i < n; ++i) {
      double a = c[i] - r;
      double b = c[i] + r;
      if (i == n - 1) {
        a = std::max(0.0, boundary_only ? 0.0 : a);
        b = boundary_only ? r : std::max(0.0, b);
      }
      lo[i] = any ? std::min(lo[i], a) : a;
      hi[i] = any ? std::max(hi[i], b) : b;
    }
    any = true;
  };
  std::vector<Point> out;
  std::vector<Point> singular;
  if (const auto& d = mu.interior()) {
    const auto& s = d->support();
    if (std::isfinite(s.radius)) extend(s.center, s.radius, false);
    else extend(Coords{}, box, false);
    if (d->singularity()) singular.emplace_back(n, d->singularity()->center);
  }
  if (const auto& h = mu.boundary_line()) {
    const auto& s = h->support();
    Coords c = s.center;
    c[n - 1] = 0.0;
    if (std::isfinite(s.radius)) extend(c, s.radius, true);
    else extend(Coords{}, box, true);
    if (h->singularity()) {
      Coords sc = h->singularity()->center;
      sc[n - 1] = 0.0;
      singular.emplace_back(n, sc);
    }
  }
  for (const auto& a : mu.atoms()) {
    extend(a.location.raw(), 0.0, false);
    out.push_back(a.location);
  }
  if (!any) extend(Coords{}, box, false);

  std::vector<int> k(n, 0);
  while (true) {
    Coords c{};
    for (int i = 0; i < n; ++i)
      c[i] = per_axis == 1 ? 0.5 * (lo[i] + hi[i]) : lo[i] + (hi[i] - lo[i]) * k[i] / (per_axis - 1);
    out.emplace_back(n, c);
    int i = 0;
    while (i < n && ++k[i] == per_axis) k[i++] = 0;
    if (i == n) break;
  }
  for (const auto& s : singular) {
    out.push_back(s);
    for (double off : {1e-1, 1e-2, 1e-3}) {
      Coords c = s.raw();
      c[n - 1] += off;
      out.emplace_back(n, c);
    }
  }
  return out;
}

std::vector<double> geometric_radii(double lo, double hi, double ratio) {
  if (!(lo > 0.0) || !(hi >= lo) || !(ratio > 1.0)) throw std::domain_error("geometric_radii: need 0 < lo <= hi, ratio > 1");
  std::vector<double> out;
  for (double s = lo; s < hi * (1.0 - 1e-12); s *= ratio) out.push_back(s);
  out.push_back(hi);
  return out;
}

}  // namespace halfheat
