#include "halfheat/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <span>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace halfheat::quadrature {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

// Panels for the log-radial variable s = log(r_max / r).
constexpr std::array<double, 14> kLogPanels{0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 40.0, 80.0, 200.0};
constexpr double kLogTailStart = 200.0;

struct Piece {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

template <class F>
Piece gk_piece(F& f, double a, double b) {
  double err = 0.0;
  double l1 = 0.0;
  const double v = GK::integrate(f, a, b, 0, 0.0, &err, &l1);
  return {a, b, v, err};
}

template <class F>
double adaptive(F& f, std::span<const double> breaks, double rel_tol, unsigned max_intervals, double abs_tol = 0.0) {
  std::priority_queue<Piece> heap;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    const Piece p = gk_piece(f, breaks[i], breaks[i + 1]);
    total += p.value;
    error += p.error;
    heap.push(p);
  }
  while (!heap.empty() && heap.size() < max_intervals && error > std::max(abs_tol, rel_tol * std::abs(total))) {
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    const Piece l = gk_piece(f, worst.a, mid);
    const Piece r = gk_piece(f, mid, worst.b);
    total += l.value + r.value - worst.value;
    error += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
  }
  double sum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

double radial_integral(const Region& region, const Coords& pole, const Coords& dir, const PolarIntegrand& f,
                       const PolarOptions& opts) {
  const RayInterval iv = ray_interval(region, pole, dir);
  if (iv.empty()) return 0.0;
  const int d = region.dim;
  Coords y{};
  auto at = [&](double r) -> double {
    for (int i = 0; i < d; ++i) y[i] = pole[i] + r * dir[i];
    if (region.half_space && y[d - 1] < 0.0) y[d - 1] = 0.0;
    return f(y, r);
  };
  const double tol = opts.rel_tol;

  if (!opts.singular_pole || iv.lo > 1e-3 * iv.hi) {
    auto g = [&](double r) { return at(r) * std::pow(r, d - 1); };
    const double br[] = {iv.lo, iv.hi};
    return adaptive(g, br, tol, opts.max_intervals);
  }

  if (iv.lo > 0.0) {
    // r = e^u
    auto g = [&](double u) {
      const double r = std::exp(u);
      return at(r) * std::pow(r, d);
    };
    const double br[] = {std::log(iv.lo), std::log(iv.hi)};
    return adaptive(g, br, tol, opts.max_intervals);
  }

  // r = hi * e^{-s}; r^{-d} stays representable up to the tail start.
  auto g = [&](double s) {
    const double r = iv.hi * std::exp(-s);
    const double v = at(r) * std::pow(r, d);
    return std::isfinite(v) ? v : 0.0;
  };
  double total = adaptive(g, kLogPanels, tol, opts.max_intervals);
  // Algebraic tail ~ s^{-b} (log-type singularities), b from the local slope.
  const double g_end = g(kLogTailStart);
  if (g_end > 0.0) {
    const double g_prev = g(0.9 * kLogTailStart);
    const double b = std::log(g_prev / g_end) / std::log(1.0 / 0.9);
    if (!(b > 1.0 + 1e-6)) return kInf;
    total += g_end * kLogTailStart / (b - 1.0);
  }
  return total;
}

}  // namespace

RayInterval ray_interval(const Region& region, const Coords& pole, const Coords& dir) {
  const int d = region.dim;
  double lo = 0.0;
  double hi = kInf;
  for (const auto& ball : region.balls) {
    if (!std::isfinite(ball.radius)) continue;
    double b = 0.0;
    double w2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double w = pole[i] - ball.center[i];
      b += dir[i] * w;
      w2 += w * w;
    }
    const double c = w2 - ball.radius * ball.radius;
    const double disc = b * b - c;
    if (disc <= 0.0) return {};
    const double sq = std::sqrt(disc);
    // Roots of r^2 + 2 b r + c, computed without cancellation.
    const double q = -(b + std::copysign(sq, b));
    double r1 = q;
    double r2 = q != 0.0 ? c / q : 0.0;
    if (r1 > r2) std::swap(r1, r2);
    lo = std::max(lo, r1);
    hi = std::min(hi, r2);
  }
  if (region.half_space) {
    const double pn = pole[d - 1];
    const double wn = dir[d - 1];
    if (wn < 0.0) {
      hi = std::min(hi, -pn / wn);
    } else if (wn > 0.0) {
      if (pn < 0.0) lo = std::max(lo, -pn / wn);
    } else if (pn < 0.0) {
      return {};
    }
  }
  if (!std::isfinite(hi)) hi = lo;  // unbounded regions are not integrated
  return {lo, hi};
}

double integrate_polar(const Region& region, const Coords& pole, const PolarIntegrand& f, const PolarOptions& opts) {
  require_dimension(region.dim);
  PolarOptions inner = opts;
  inner.rel_tol = opts.rel_tol * 0.1;
  constexpr double pi = std::numbers::pi;
  const double quarters[] = {0.0, pi / 2, pi, 1.5 * pi, 2.0 * pi};

  switch (region.dim) {
    case 1: {
      double total = 0.0;
      for (double s : {-1.0, 1.0}) total += radial_integral(region, pole, Coords{s, 0.0, 0.0}, f, inner);
      return total;
    }
    case 2: {
      auto ang = [&](double th) {
        return radial_integral(region, pole, Coords{std::cos(th), std::sin(th), 0.0}, f, inner);
      };
      return adaptive(ang, quarters, opts.rel_tol, opts.max_intervals);
    }
    default: {
      auto outer = [&](double phi) {
        const double sp = std::sin(phi);
        const double cp = std::cos(phi);
        auto ang = [&](double th) {
          return radial_integral(region, pole, Coords{sp * std::cos(th), sp * std::sin(th), cp}, f, inner);
        };
        return adaptive(ang, quarters, inner.rel_tol, opts.max_intervals) * sp;
      };
      const double halves[] = {0.0, pi / 2, pi};
      return adaptive(outer, halves, opts.rel_tol, opts.max_intervals);
    }
  }
}

double integrate_polar(const Region& region, const Coords& pole, const Integrand& f, const PolarOptions& opts) {
  return integrate_polar(region, pole, PolarIntegrand([&](const Coords& y, double) { return f(y); }), opts);
}

double integrate_interval(const std::function<double(double)>& f, double a, double b, double rel_tol,
                          unsigned max_intervals, double abs_tol) {
  if (!(b > a)) return 0.0;
  const double br[] = {a, b};
  return adaptive(f, br, rel_tol, max_intervals, abs_tol);
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

}  // namespace halfheat::quadrature
