#pragma once

// Space-time tensor grid on the half-space: a graded normal axis (0, R],
// graded tangential axes [-W, W] and geometric time nodes t_min .. T.

#include <cstddef>
#include <vector>

#include "halfheat/point.hpp"

namespace halfheat {

struct GridSpec {
  int dim = 1;
  double T = 1.0;
  /// First time node; 0 means t_min_ratio * T.
  double t_min = 0.0;
  double t_min_ratio = 1e-10;
  int time_nodes = 48;
  /// Trailing time nodes spaced uniformly by T / (uniform_time_nodes + 1); the rest are geometric.
  int uniform_time_nodes = 0;

  /// Finest spacing, used next to x_N = 0 and refine centers; 0 means 0.1 sqrt(t_min).
  double x_min = 0.0;
  /// Geometric growth factor of neighbouring spacings.
  double grading = 1.15;
  /// Spacing inside the core |x| <= core (normal: x_N <= core).
  double h_core = 0.05;
  double normal_core = 2.0;
  double tangential_core = 2.0;
  /// Largest spacing far out; 0 means 0.25 sqrt(T).
  double h_far = 0.0;
  /// Normal extent; 0 means normal_core + 12 sqrt(T).
  double R = 0.0;
  /// Tangential half-width; 0 means tangential_core + 12 sqrt(T).
  double tangential_half_width = 0.0;
  /// Extra grading centers (singular points of the data).
  std::vector<double> normal_refine;
  std::vector<double> tangential_refine;
  int max_nodes_per_axis = 4096;

  void validate() const;
  /// Halves t_min, x_min and the spacings, doubles the time nodes and flattens the grading.
  GridSpec refined() const;
  /// Copy with a new horizon, keeping the relative time resolution.
  GridSpec with_horizon(double horizon) const;
};

class Grid {
 public:
  explicit Grid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  double horizon() const { return spec_.T; }
  const std::vector<double>& normal() const { return normal_; }
  const std::vector<double>& tangential() const { return tangential_; }
  const std::vector<double>& times() const { return times_; }

  std::size_t normal_count() const { return normal_.size(); }
  std::size_t tangential_count() const { return dim() > 1 ? tangential_.size() : 1; }
  std::size_t nodes_per_slice() const;

  /// Node index from axis indices (normal fastest, then tangential 1, then tangential 2).
  std::size_t index(std::size_t i_normal, std::size_t i_t1 = 0, std::size_t i_t2 = 0) const;
  Point node(std::size_t index) const;

 private:
  GridSpec spec_;
  std::vector<double> normal_;
  std::vector<double> tangential_;
  std::vector<double> times_;
};

/// Nodes on [a, b] marched with spacing min(core/far spacing, max(h_min, (g - 1) * distance to nearest center)).
std::vector<double> graded_line(double a, double b, double h_min, double grading, double h_core, double core,
                                double h_far, const std::vector<double>& centers, int max_nodes);

}  // namespace halfheat
