#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace halfheat {

inline constexpr int kMaxDim = 3;

/// Raw coordinates; only the first `dim` entries are meaningful.
using Coords = std::array<double, kMaxDim>;

inline void require_dimension(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw std::invalid_argument("dimension must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
}

/// A point of the closed half-space {x_N >= 0} in R^N, stored as (x', x_N).
class Point {
 public:
  Point() = default;

  Point(int dim, const Coords& c) : dim_(dim), c_(c) {
    require_dimension(dim);
    for (int i = dim; i < kMaxDim; ++i) c_[i] = 0.0;
    if (!(normal() >= 0.0))
      throw std::domain_error("point lies outside the closed half-space (x_N < 0)");
  }

  Point(std::initializer_list<double> xs) {
    const int n = static_cast<int>(xs.size());
    require_dimension(n);
    int i = 0;
    for (double v : xs)
      if (i < kMaxDim) c_[i++] = v;
    *this = Point(n, c_);
  }

  /// Builds (x', x_N) from a tangential part and a normal coordinate.
  static Point from_parts(std::span<const double> tangential, double normal) {
    Coords c{};
    const int n = static_cast<int>(tangential.size()) + 1;
    require_dimension(n);
    for (std::size_t i = 0; i < tangential.size(); ++i) c[i] = tangential[i];
    c[n - 1] = normal;
    return Point(n, c);
  }

  static Point origin(int dim) { return Point(dim, Coords{}); }

  int dim() const { return dim_; }
  double normal() const { return c_[dim_ - 1]; }
  std::span<const double> tangential() const { return {c_.data(), static_cast<std::size_t>(dim_ - 1)}; }
  std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }
  const Coords& raw() const { return c_; }
  double operator[](int i) const { return c_[i]; }

  bool on_boundary() const { return normal() == 0.0; }

 private:
  int dim_ = 1;
  Coords c_{};
};

inline double distance_squared(const Coords& a, const Coords& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(const Point& a, const Point& b) {
  return std::sqrt(distance_squared(a.raw(), b.raw(), a.dim()));
}

/// Fujita-type exponent p_d = 1 + 2/d.
inline double fujita_exponent(int d) { return 1.0 + 2.0 / d; }

}  // namespace halfheat
