#include "halfheat/duhamel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>

namespace halfheat {

namespace {

constexpr double kWindowSigmas = 12.0;
constexpr double kPieceFraction = 0.5;

using Space = boost::math::quadrature::gauss<double, 6>;
using Time = boost::math::quadrature::gauss<double, 5>;

// Symmetric Gauss-Legendre rule on [0, 1].
struct UnitRule {
  std::vector<double> x;
  std::vector<double> w;
};

template <class G>
UnitRule unit_rule() {
  UnitRule r;
  const auto& ab = G::abscissa();
  const auto& wt = G::weights();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    if (ab[i] == 0.0) {
      r.x.push_back(0.5);
      r.w.push_back(0.5 * wt[i]);
      continue;
    }
    for (double s : {-1.0, 1.0}) {
      r.x.push_back(0.5 * (1.0 + s * ab[i]));
      r.w.push_back(0.5 * wt[i]);
    }
  }
  return r;
}

const UnitRule& space_rule() {
  static const UnitRule r = unit_rule<Space>();
  return r;
}

const UnitRule& time_rule() {
  static const UnitRule r = unit_rule<Time>();
  return r;
}

// Hat-function weights of a 1-D kernel k(x, y) over the elements of `nodes`. With
// `half_line`, an extra element [0, nodes[0]] carries the rising half of hat 0 (the value
// at y = 0 is zero).
template <class Kernel>
WeightRow hat_weights(const std::vector<double>& nodes, double x, double tau, bool half_line, Kernel&& kern) {
  const std::size_t m = nodes.size();
  const double sq = std::sqrt(tau);
  const double lo_win = x - kWindowSigmas * sq;
  const double hi_win = x + kWindowSigmas * sq;
  const UnitRule& rule = space_rule();
  WeightRow row;

  auto add = [&](std::uint32_t idx, double w) {
    if (w == 0.0) return;
    if (!row.empty() && row.back().first == idx)
      row.back().second += w;
    else
      row.emplace_back(idx, w);
  };

  // Elements e = 0 .. m (- 1 without half_line); element e spans [y_{e-1}, y_e] with y_{-1} = 0.
  auto left = [&](std::size_t e) { return e == 0 ? 0.0 : nodes[e - 1]; };
  std::size_t e = half_line ? 0 : 1;
  {
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), lo_win);
    const std::size_t first = static_cast<std::size_t>(it - nodes.begin());
    e = std::max(e, first);
  }
  for (; e < m; ++e) {
    const double ya = left(e);
    const double yb = nodes[e];
    if (ya >= hi_win) break;
    const double a = std::max(ya, lo_win);
    const double b = std::min(yb, hi_win);
    if (!(b > a)) continue;
    const double h = yb - ya;
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / (kPieceFraction * sq))));
    const double len = (b - a) / pieces;
    double wl = 0.0;
    double wr = 0.0;
    for (int p = 0; p < pieces; ++p) {
      const double pa = a + p * len;
      for (std::size_t q = 0; q < rule.x.size(); ++q) {
        const double y = pa + len * rule.x[q];
        const double kv = kern(x, y, tau) * rule.w[q] * len;
        wl += kv * (yb - y) / h;
        wr += kv * (y - ya) / h;
      }
    }
    if (e > 0) add(static_cast<std::uint32_t>(e - 1), wl);
    add(static_cast<std::uint32_t>(e), wr);
  }
  return row;
}

double gamma1(double u, double tau) {
  return std::exp(-u * u / (4.0 * tau)) / std::sqrt(4.0 * std::numbers::pi * tau);
}

SparseMatrix axis_matrix(const std::vector<double>& nodes, double tau, bool normal) {
  SparseMatrix mat;
  for (double x : nodes) mat.append_row(normal ? normal_weights(nodes, x, tau) : tangential_weights(nodes, x, tau));
  return mat;
}

// sum_q c_q * mats[q] for matrices sharing the row count.
SparseMatrix combine(const std::vector<SparseMatrix>& mats, const std::vector<double>& c, std::size_t cols) {
  SparseMatrix out;
  std::vector<double> dense(cols, 0.0);
  std::vector<char> used(cols, 0);
  const std::size_t rows = mats.front().rows;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::uint32_t> touched;
    for (std::size_t q = 0; q < mats.size(); ++q) {
      const auto& m = mats[q];
      for (std::size_t i = m.start[r]; i < m.start[r + 1]; ++i) {
        const auto j = m.col[i];
        if (!used[j]) {
          used[j] = 1;
          touched.push_back(j);
        }
        dense[j] += c[q] * m.val[i];
      }
    }
    std::sort(touched.begin(), touched.end());
    WeightRow row;
    for (auto j : touched) {
      if (dense[j] != 0.0) row.emplace_back(j, dense[j]);
      dense[j] = 0.0;
      used[j] = 0;
    }
    out.append_row(row);
  }
  return out;
}

// y[r * stride_out + i] += alpha * sum_c A[r, c] * x[c * stride_in + i], for i < len
void axis_multiply(const SparseMatrix& A, const double* x, double* y, std::size_t stride, std::size_t len,
                   double alpha) {
  for (std::size_t r = 0; r < A.rows; ++r) {
    double* yr = y + r * stride;
    for (std::size_t k = A.start[r]; k < A.start[r + 1]; ++k) {
      const double w = alpha * A.val[k];
      const double* xc = x + A.col[k] * stride;
      for (std::size_t i = 0; i < len; ++i) yr[i] += w * xc[i];
    }
  }
}

std::vector<double> row_sums(const SparseMatrix& m) {
  std::vector<double> r(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t k = m.start[i]; k < m.start[i + 1]; ++k) r[i] += m.val[k];
  return r;
}

// Diagonal of a square matrix whose rows list columns in increasing order.
std::vector<double> diagonal(const SparseMatrix& m) {
  std::vector<double> d(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t k = m.start[i]; k < m.start[i + 1]; ++k)
      if (m.col[k] == i) d[i] = m.val[k];
  return d;
}

double sum_weights(const WeightRow& row) {
  double s = 0.0;
  for (const auto& e : row) s += e.second;
  return s;
}

// Hat-function interpolation weights on one axis; `half_line` adds the zero node at 0.
WeightRow hat_at(const std::vector<double>& nodes, double x, bool half_line) {
  WeightRow w;
  if (nodes.empty() || x > nodes.back()) return w;
  if (x <= nodes.front()) {
    if (half_line && x > 0.0) w.emplace_back(0, x / nodes.front());
    else if (x == nodes.front()) w.emplace_back(0, 1.0);
    return w;
  }
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  if (j >= nodes.size()) {
    w.emplace_back(static_cast<std::uint32_t>(nodes.size() - 1), 1.0);
    return w;
  }
  const double th = (x - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
  w.emplace_back(static_cast<std::uint32_t>(j - 1), 1.0 - th);
  w.emplace_back(static_cast<std::uint32_t>(j), th);
  return w;
}

// Tensor contraction of per-axis rows against node values.
double contract(const Grid& grid, const std::vector<double>& values, const WeightRow& wn,
                const std::vector<WeightRow>& wt) {
  const std::size_t mn = grid.normal_count();
  const std::size_t mt = grid.tangential().size();
  auto line = [&](std::size_t offset) {
    double s = 0.0;
    for (const auto& [c, w] : wn) s += w * values[offset + c];
    return s;
  };
  if (wt.empty()) return line(0);
  double s = 0.0;
  if (wt.size() == 1) {
    for (const auto& [c, w] : wt[0]) s += w * line(c * mn);
    return s;
  }
  for (const auto& [c2, v2] : wt[1])
    for (const auto& [c1, v1] : wt[0]) s += v1 * v2 * line(mn * (c1 + mt * c2));
  return s;
}

}  // namespace

double interpolate(const Grid& grid, const std::vector<double>& values, const Point& x) {
  if (x.dim() != grid.dim()) throw std::invalid_argument("interpolate: dimension mismatch");
  const WeightRow wn = hat_at(grid.normal(), x.normal(), true);
  std::vector<WeightRow> wt;
  for (int i = 0; i + 1 < grid.dim(); ++i) wt.push_back(hat_at(grid.tangential(), x[i], false));
  return contract(grid, values, wn, wt);
}

std::pair<double, double> erf_time_moments(double a, double dt) {
  const double sq = std::sqrt(dt);
  const double z = a / sq;
  const double er = std::erf(z);
  const double ec = std::erfc(z);
  const double ex = std::exp(-z * z) / std::sqrt(std::numbers::pi);
  const double e0 = dt * er - 2.0 * a * a * ec + 2.0 * a * sq * ex;
  const double e1 = 0.5 * dt * dt * er + (2.0 / 3.0) * a * a * a * a * ec + (a * dt * sq - 2.0 * a * a * a * sq) * ex / 3.0;
  return {e0 - e1 / dt, e1 / dt};
}

void SparseMatrix::append_row(const std::vector<std::pair<std::uint32_t, double>>& entries) {
  for (const auto& [c, v] : entries) {
    col.push_back(c);
    val.push_back(v);
  }
  start.push_back(val.size());
  ++rows;
}

WeightRow normal_weights(const std::vector<double>& nodes, double x, double tau) {
  if (!(tau > 0.0)) throw std::domain_error("normal_weights: tau must be positive");
  return hat_weights(nodes, x, tau, true, [](double xx, double y, double t) {
    return gamma1(xx - y, t) * -std::expm1(-xx * y / t);
  });
}

WeightRow tangential_weights(const std::vector<double>& nodes, double x, double tau) {
  if (!(tau > 0.0)) throw std::domain_error("tangential_weights: tau must be positive");
  return hat_weights(nodes, x, tau, false, [](double xx, double y, double t) { return gamma1(xx - y, t); });
}

DuhamelOperator::DuhamelOperator(std::shared_ptr<const Grid> grid, int threads) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("DuhamelOperator: null grid");
  const std::size_t K = grid_->times().size();
  steps_.resize(K);
  const unsigned nt = static_cast<unsigned>(std::clamp(threads, 1, 64));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < K; k = next++) steps_[k] = build_step(k);
  };
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
}

DuhamelOperator::Step DuhamelOperator::build_step(std::size_t k) const {
  const auto& times = grid_->times();
  const bool multi = grid_->dim() > 1;
  Step s;
  s.dt = times[k] - (k == 0 ? 0.0 : times[k - 1]);
  if (k > 0) {
    s.propagator.normal = axis_matrix(grid_->normal(), s.dt, true);
    if (multi) s.propagator.tangential = axis_matrix(grid_->tangential(), s.dt, false);
  }
  const UnitRule& rule = time_rule();
  std::vector<SparseMatrix> normals;
  for (std::size_t q = 0; q < rule.x.size(); ++q) {
    const double v = rule.x[q];
    const double tau = s.dt * v * v;
    const double c = 2.0 * s.dt * v * rule.w[q];
    s.taus.push_back(tau);
    s.a.push_back(k == 0 ? c : c * (1.0 - v * v));
    s.b.push_back(k == 0 ? 0.0 : c * v * v);
    normals.push_back(axis_matrix(grid_->normal(), tau, true));
    s.rowsum_normal.push_back(row_sums(normals.back()));
    s.diag_normal.push_back(diagonal(normals.back()));
    if (multi) {
      Factor f;
      f.normal = std::move(normals.back());
      f.tangential = axis_matrix(grid_->tangential(), tau, false);
      s.rowsum_tangential.push_back(row_sums(f.tangential));
      s.diag_tangential.push_back(diagonal(f.tangential));
      f.a = s.a.back();
      f.b = s.b.back();
      s.local.push_back(std::move(f));
    }
  }
  for (double x : grid_->normal()) {
    const auto [ma, mb] = erf_time_moments(0.5 * x, s.dt);
    s.mass_a.push_back(k == 0 ? ma + mb : ma);
    s.mass_b.push_back(k == 0 ? 0.0 : mb);
  }
  if (!multi) {
    const std::size_t m = grid_->normal_count();
    Factor fa;
    fa.normal = combine(normals, s.a, m);
    fa.a = 1.0;
    s.local.push_back(std::move(fa));
    if (k > 0) {
      Factor fb;
      fb.normal = combine(normals, s.b, m);
      fb.b = 1.0;
      s.local.push_back(std::move(fb));
    }
  }
  return s;
}

void DuhamelOperator::apply_factor(const Factor& f, const std::vector<double>& in, std::vector<double>& out,
                                   double scale, std::vector<double>& work) const {
  const std::size_t mn = grid_->normal_count();
  const int d = grid_->dim();
  if (d == 1) {
    axis_multiply(f.normal, in.data(), out.data(), 1, 1, scale);
    return;
  }
  const std::size_t mt = grid_->tangential().size();
  const std::size_t lines = in.size() / mn;
  work.assign(in.size(), 0.0);
  for (std::size_t l = 0; l < lines; ++l)
    axis_multiply(f.normal, in.data() + l * mn, work.data() + l * mn, 1, 1, 1.0);
  if (d == 2) {
    axis_multiply(f.tangential, work.data(), out.data(), mn, mn, scale);
    return;
  }
  std::vector<double> work2(in.size(), 0.0);
  for (std::size_t j = 0; j < mt; ++j)
    axis_multiply(f.tangential, work.data() + j * mn * mt, work2.data() + j * mn * mt, mn, mn, 1.0);
  axis_multiply(f.tangential, work2.data(), out.data(), mn * mt, mn * mt, scale);
}

SliceValues DuhamelOperator::apply(const SliceValues& F) const {
  const std::size_t K = steps_.size();
  const std::size_t n = grid_->nodes_per_slice();
  if (F.size() != K) throw std::invalid_argument("DuhamelOperator::apply: wrong number of slices");
  SliceValues I(K, std::vector<double>(n, 0.0));
  std::vector<double> src(n);
  std::vector<double> work;
  for (std::size_t k = 0; k < K; ++k) {
    if (F[k].size() != n) throw std::invalid_argument("DuhamelOperator::apply: wrong slice size");
    const Step& s = steps_[k];
    if (k > 0) apply_factor(s.propagator, I[k - 1], I[k], 1.0, work);
    for (const Factor& f : s.local) {
      const auto& prev = k > 0 ? F[k - 1] : F[0];
      for (std::size_t i = 0; i < n; ++i) src[i] = f.a * F[k][i] + f.b * prev[i];
      apply_factor(f, src, I[k], 1.0, work);
    }
    add_mass_correction(s, F[k], k > 0 ? F[k - 1] : F[0], I[k]);
  }
  return I;
}

void DuhamelOperator::add_mass_correction(const Step& s, const std::vector<double>& Fk,
                                          const std::vector<double>& Fprev, std::vector<double>& out) const {
  const std::size_t mn = grid_->normal_count();
  const std::size_t mt = grid_->tangential().size();
  const std::size_t nq = s.taus.size();
  const int d = grid_->dim();
  for (std::size_t node = 0; node < out.size(); ++node) {
    const std::size_t in = node % mn;
    const std::size_t rest = node / mn;
    double ca = s.mass_a[in];
    double cb = s.mass_b[in];
    double da = 0.0;
    double db = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      double rs = s.rowsum_normal[q][in];
      double dg = s.diag_normal[q][in];
      if (d > 1) {
        rs *= s.rowsum_tangential[q][rest % mt];
        dg *= s.diag_tangential[q][rest % mt];
      }
      if (d > 2) {
        rs *= s.rowsum_tangential[q][rest / mt];
        dg *= s.diag_tangential[q][rest / mt];
      }
      ca -= s.a[q] * rs;
      cb -= s.b[q] * rs;
      da += s.a[q] * dg;
      db += s.b[q] * dg;
    }
    // Keep every coefficient of the local operator nonnegative (monotone Picard map).
    out[node] += std::max(ca, -da) * Fk[node] + std::max(cb, -db) * Fprev[node];
  }
}

double DuhamelOperator::evaluate_factor(const std::vector<double>& values, double x_normal,
                                        const std::vector<double>& x_tan, double tau) const {
  const WeightRow wn = normal_weights(grid_->normal(), x_normal, tau);
  std::vector<WeightRow> wt;
  for (double xt : x_tan) wt.push_back(tangential_weights(grid_->tangential(), xt, tau));
  return contract(*grid_, values, wn, wt);
}

double DuhamelOperator::evaluate(const SliceValues& F, const SliceValues& I, const Point& x, std::size_t k) const {
  if (x.dim() != grid_->dim()) throw std::invalid_argument("DuhamelOperator::evaluate: dimension mismatch");
  if (k >= steps_.size() || F.size() <= k || (k > 0 && I.size() < k))
    throw std::out_of_range("DuhamelOperator::evaluate: missing time slices");
  if (x.normal() == 0.0) return 0.0;
  const auto tan = x.tangential();
  const std::vector<double> xt(tan.begin(), tan.end());
  const Step& s = steps_[k];
  double total = 0.0;
  if (k > 0) total += evaluate_factor(I[k - 1], x.normal(), xt, s.dt);
  const auto& prev = k > 0 ? F[k - 1] : F[0];
  const double fk = interpolate(*grid_, F[k], x);
  const double fp = interpolate(*grid_, prev, x);
  const auto [ma, mb] = erf_time_moments(0.5 * x.normal(), s.dt);
  double ca = k == 0 ? ma + mb : ma;
  double cb = k == 0 ? 0.0 : mb;
  for (std::size_t q = 0; q < s.taus.size(); ++q) {
    const double tau = s.taus[q];
    const WeightRow wn = normal_weights(grid_->normal(), x.normal(), tau);
    std::vector<WeightRow> wt;
    double rs = sum_weights(wn);
    for (double v : xt) {
      wt.push_back(tangential_weights(grid_->tangential(), v, tau));
      rs *= sum_weights(wt.back());
    }
    total += s.a[q] * contract(*grid_, F[k], wn, wt) + s.b[q] * contract(*grid_, prev, wn, wt);
    ca -= s.a[q] * rs;
    cb -= s.b[q] * rs;
  }
  return total + ca * fk + cb * fp;
}

std::size_t DuhamelOperator::stored_nonzeros() const {
  std::size_t n = 0;
  for (const auto& s : steps_) {
    n += s.propagator.normal.nonzeros() + s.propagator.tangential.nonzeros();
    for (const auto& f : s.local) n += f.normal.nonzeros() + f.tangential.nonzeros();
  }
  return n;
}

}  // namespace halfheat
