#include "halfheat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace halfheat {

namespace {

double resolved_t_min(const GridSpec& s) { return s.t_min > 0.0 ? s.t_min : s.t_min_ratio * s.T; }
double resolved_x_min(const GridSpec& s) { return s.x_min > 0.0 ? s.x_min : 0.1 * std::sqrt(resolved_t_min(s)); }
double resolved_h_far(const GridSpec& s) {
  return s.h_far > 0.0 ? s.h_far : std::max(s.h_core, 0.25 * std::sqrt(s.T));
}

}  // namespace

void GridSpec::validate() const {
  require_dimension(dim);
  if (!(T > 0.0) || !std::isfinite(T)) throw std::domain_error("grid horizon T must be positive");
  if (t_min < 0.0 || !(t_min_ratio > 0.0 && t_min_ratio < 1.0))
    throw std::domain_error("t_min must be nonnegative and t_min_ratio in (0, 1)");
  if (resolved_t_min(*this) >= T) throw std::domain_error("t_min must be below T");
  if (time_nodes < 2) throw std::domain_error("need at least two time nodes");
  if (uniform_time_nodes < 0 || uniform_time_nodes > time_nodes - 2)
    throw std::domain_error("uniform_time_nodes must lie in [0, time_nodes - 2]");
  if (resolved_t_min(*this) >= T / (uniform_time_nodes + 1))
    throw std::domain_error("t_min must be below the uniform time step");
  if (!(grading > 1.0)) throw std::domain_error("grading must exceed 1");
  if (!(h_core > 0.0) || x_min < 0.0 || h_far < 0.0 || R < 0.0 || tangential_half_width < 0.0)
    throw std::domain_error("grid spacings and extents must be positive");
  if (normal_core < 0.0 || tangential_core < 0.0) throw std::domain_error("core extents must be nonnegative");
  if (max_nodes_per_axis < 4) throw std::domain_error("max_nodes_per_axis too small");
}

GridSpec GridSpec::refined() const {
  GridSpec r = *this;
  r.t_min = 0.5 * resolved_t_min(*this);
  r.time_nodes = 2 * time_nodes;
  r.uniform_time_nodes = 2 * uniform_time_nodes;
  r.x_min = 0.5 * resolved_x_min(*this);
  r.h_core = 0.5 * h_core;
  r.h_far = 0.5 * resolved_h_far(*this);
  r.grading = 1.0 + 0.5 * (grading - 1.0);
  r.max_nodes_per_axis = 2 * max_nodes_per_axis;
  return r;
}

GridSpec GridSpec::with_horizon(double horizon) const {
  GridSpec r = *this;
  if (t_min > 0.0) r.t_min = t_min * horizon / T;
  r.T = horizon;
  if (h_far > 0.0) r.h_far = h_far * std::sqrt(horizon / T);
  r.R = 0.0;
  r.tangential_half_width = 0.0;
  return r;
}

std::vector<double> graded_line(double a, double b, double h_min, double grading, double h_core, double core,
                                double h_far, const std::vector<double>& centers, int max_nodes) {
  auto spacing = [&](double x) {
    const double ax = std::abs(x);
    double h = ax <= core ? h_core : std::min(h_far, h_core + (grading - 1.0) * (ax - core));
    double d = std::numeric_limits<double>::infinity();
    for (double c : centers) d = std::min(d, std::abs(x - c));
    return std::min(h, std::max(h_min, (grading - 1.0) * d));
  };
  std::vector<double> nodes{a};
  double x = a;
  while (x < b) {
    const double h = spacing(x);
    // Do not step across a center in one stride.
    double next = x + h;
    for (double c : centers)
      if (c > x + h_min && c < next) next = c;
    x = std::min(next, b);
    if (b - x < 0.25 * spacing(x)) x = b;
    if (x > nodes.back()) nodes.push_back(x);
    if (static_cast<int>(nodes.size()) > max_nodes)
      throw std::length_error("grid axis exceeds " + std::to_string(max_nodes) + " nodes");
  }
  return nodes;
}

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  const double t0 = resolved_t_min(spec_);
  const double x_min = resolved_x_min(spec_);
  const double h_far = resolved_h_far(spec_);
  const double sqT = std::sqrt(spec_.T);

  std::vector<double> nc{0.0};
  for (double c : spec_.normal_refine)
    if (c > 0.0) nc.push_back(c);
  double R = spec_.R > 0.0 ? spec_.R : spec_.normal_core + 12.0 * sqT;
  for (double c : nc) R = std::max(R, c + 12.0 * sqT);
  normal_ = graded_line(x_min, R, x_min, spec_.grading, spec_.h_core, spec_.normal_core, h_far, nc,
                        spec_.max_nodes_per_axis);

  if (spec_.dim > 1) {
    double W = spec_.tangential_half_width > 0.0 ? spec_.tangential_half_width : spec_.tangential_core + 12.0 * sqT;
    for (double c : spec_.tangential_refine) W = std::max(W, std::abs(c) + 12.0 * sqT);
    tangential_ = graded_line(-W, W, x_min, spec_.grading, spec_.h_core, spec_.tangential_core, h_far,
                              spec_.tangential_refine, spec_.max_nodes_per_axis);
  }

  const int K = spec_.time_nodes;
  const int nu = spec_.uniform_time_nodes;
  const int ng = K - nu;  // geometric nodes t0 .. t_switch
  const double t_switch = spec_.T / (nu + 1);
  times_.resize(K);
  for (int k = 0; k < ng; ++k) times_[k] = t0 * std::pow(t_switch / t0, static_cast<double>(k) / (ng - 1));
  for (int j = 1; j <= nu; ++j) times_[ng - 1 + j] = spec_.T * (j + 1) / (nu + 1);
  times_.back() = spec_.T;
}

std::size_t Grid::nodes_per_slice() const {
  std::size_t n = normal_.size();
  for (int i = 1; i < dim(); ++i) n *= tangential_.size();
  return n;
}

std::size_t Grid::index(std::size_t i_normal, std::size_t i_t1, std::size_t i_t2) const {
  const std::size_t mn = normal_.size();
  const std::size_t mt = tangential_.size();
  return i_normal + mn * (i_t1 + mt * i_t2);
}

Point Grid::node(std::size_t index) const {
  const std::size_t mn = normal_.size();
  const std::size_t mt = std::max<std::size_t>(tangential_.size(), 1);
  Coords c{};
  c[dim() - 1] = normal_[index % mn];
  std::size_t rest = index / mn;
  for (int i = 0; i + 1 < dim(); ++i) {
    c[i] = tangential_[rest % mt];
    rest /= mt;
  }
  return Point(dim(), c);
}

}  // namespace halfheat
