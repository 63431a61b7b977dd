#include "halfheat/gauges.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "halfheat/errors.hpp"

namespace halfheat {

namespace {

constexpr int kBisectionSteps = 80;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error(std::string(what) + " must be positive and finite");
}

}  // namespace

std::string to_string(GaugeKind kind) {
  switch (kind) {
    case GaugeKind::identity: return "identity";
    case GaugeKind::power: return "power";
    case GaugeKind::log_type: return "log_type";
    case GaugeKind::shifted_log: return "shifted_log";
  }
  return "unknown";
}

ConvexGauge ConvexGauge::identity() { return ConvexGauge(GaugeKind::identity, 1.0, 0.0, 0.0); }

ConvexGauge ConvexGauge::power(double alpha) {
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw std::domain_error("power gauge needs alpha >= 1");
  return ConvexGauge(GaugeKind::power, alpha, 0.0, 0.0);
}

ConvexGauge ConvexGauge::log_type(double beta) {
  require_finite_positive(beta, "log gauge beta");
  return ConvexGauge(GaugeKind::log_type, 1.0, beta, std::numbers::e);
}

ConvexGauge ConvexGauge::shifted_log(double beta, double L) {
  require_finite_positive(beta, "shifted log gauge beta");
  if (!(L >= std::numbers::e) || !std::isfinite(L)) throw std::domain_error("shifted log gauge needs L >= e");
  return ConvexGauge(GaugeKind::shifted_log, 1.0, beta, L);
}

std::string ConvexGauge::describe() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind_) {
    case GaugeKind::identity: os << "identity"; break;
    case GaugeKind::power: os << "power(alpha=" << alpha_ << ")"; break;
    case GaugeKind::log_type: os << "log_type(beta=" << beta_ << ")"; break;
    case GaugeKind::shifted_log: os << "shifted_log(beta=" << beta_ << ", L=" << L_ << ")"; break;
  }
  return os.str();
}

double ConvexGauge::operator()(double tau) const {
  if (!(tau >= 0.0)) throw std::domain_error("gauge argument must be nonnegative");
  switch (kind_) {
    case GaugeKind::identity: return tau;
    case GaugeKind::power: return std::pow(tau, alpha_);
    case GaugeKind::log_type:
    case GaugeKind::shifted_log: return tau * std::pow(std::log(L_ + tau), beta_);
  }
  return tau;
}

double ConvexGauge::inverse(double tau) const {
  if (!(tau >= 0.0)) throw std::domain_error("gauge inverse argument must be nonnegative");
  if (tau == 0.0 || std::isinf(tau)) return tau;
  switch (kind_) {
    case GaugeKind::identity: return tau;
    case GaugeKind::power: return std::pow(tau, 1.0 / alpha_);
    case GaugeKind::log_type:
    case GaugeKind::shifted_log: break;
  }
  // Phi(s) >= s and Phi(s) <= s [log(L + tau)]^beta for s <= tau bracket the root.
  double lo = std::log(tau) - beta_ * std::log(std::log(L_ + tau));
  double hi = std::log(tau);
  for (int i = 0; i < kBisectionSteps && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double s = std::exp(mid);
    if ((*this)(s) < tau)
      lo = mid;
    else
      hi = mid;
  }
  const double s = std::exp(0.5 * (lo + hi));
  if (!std::isfinite(s)) throw NumericalError("gauge inversion failed for tau = " + std::to_string(tau));
  return s;
}

double ConvexGauge::A(double tau, double p) const {
  if (!(p > 1.0)) throw std::domain_error("A(tau) needs p > 1");
  if (!(tau >= 0.0)) throw std::domain_error("A(tau) needs tau >= 0");
  if (kind_ == GaugeKind::power) {
    const double e = p / alpha_ - 1.0;
    if (tau == 0.0) return e > 0.0 ? 0.0 : (e == 0.0 ? 1.0 : kInf);
    return std::pow(tau, e);
  }
  if (kind_ == GaugeKind::identity) return std::pow(tau, p - 1.0);
  if (tau == 0.0) return 0.0;
  return std::pow(inverse(tau), p) / tau;
}

double ConvexGauge::B(double tau) const {
  if (!(tau >= 0.0)) throw std::domain_error("B(tau) needs tau >= 0");
  switch (kind_) {
    case GaugeKind::identity: return 1.0;
    case GaugeKind::power:
      if (tau == 0.0) return alpha_ > 1.0 ? 0.0 : 1.0;
      return std::pow(tau, 1.0 - 1.0 / alpha_);
    case GaugeKind::log_type:
    case GaugeKind::shifted_log:
      // Phi'(0) = [log L]^beta.
      if (tau == 0.0) return std::pow(std::log(L_), beta_);
      return tau / inverse(tau);
  }
  return 1.0;
}

std::vector<double> log_sample(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw std::domain_error("log_sample: need 0 < lo < hi and count >= 2");
  std::vector<double> out(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

ShiftedLogChecks check_shifted_log(double beta, double L, double p, double eps, const std::vector<double>& s) {
  ShiftedLogChecks c;
  const std::size_t n = s.size();
  if (n < 3) return c;
  auto psi = [&](double x) { return x * std::pow(std::log(L + x), beta); };

  c.convex = true;
  double prev_slope = -kInf;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = psi(s[i]);
    const double b = psi(s[i + 1]);
    if (!(a > 0.0) || !(b > 0.0)) c.convex = false;
    const double slope = (b - a) / (s[i + 1] - s[i]);
    if (slope < prev_slope * (1.0 - 1e-12)) c.convex = false;
    prev_slope = slope;
  }

  // (b) and (c) compared in log form: (p-1) log s - beta log log(L+s), eps log s - beta p log log(L+s).
  c.ratio_increasing = true;
  c.log_increasing = true;
  double prev_b = -kInf;
  double prev_c = -kInf;
  for (double x : s) {
    const double ll = std::log(std::log(L + x));
    const double fb = (p - 1.0) * std::log(x) - beta * ll;
    const double fc = eps * std::log(x) - beta * p * ll;
    if (!(fb > prev_b)) c.ratio_increasing = false;
    if (!(fc > prev_c)) c.log_increasing = false;
    prev_b = fb;
    prev_c = fc;
  }
  return c;
}

ConvexGauge ShiftedLogSearch::gauge() const {
  if (!found) throw NumericalError("shifted log gauge search did not succeed: " + diagnostic);
  return ConvexGauge::shifted_log(beta, L);
}

ShiftedLogSearch shifted_log_gauge(double beta, double p, double eps) {
  require_finite_positive(beta, "shifted log gauge beta");
  if (!(p > 1.0)) throw std::domain_error("shifted log gauge needs p > 1");
  if (!(eps > 0.0) || !(eps < p - 1.0)) throw std::domain_error("shifted log gauge needs 0 < eps < p - 1");

  const std::vector<double> sample = log_sample(1e-8, 1e8, 1000);
  const double L_max = std::exp(64.0);
  ShiftedLogSearch r;
  r.beta = beta;
  double L = std::numbers::e;
  for (int k = 0; L <= L_max; ++k, L *= 2.0) {
    const auto c = check_shifted_log(beta, L, p, eps, sample);
    r.L = L;
    r.doublings = k;
    r.convex = c.convex;
    r.ratio_increasing = c.ratio_increasing;
    r.log_increasing = c.log_increasing;
    if (c.convex && c.ratio_increasing && c.log_increasing) {
      r.found = true;
      break;
    }
  }
  if (!r.found) {
    std::ostringstream os;
    os << "no L <= e^64 passes the secant tests (beta=" << beta << ", p=" << p << ", eps=" << eps
       << "; last L=" << r.L << ": convex=" << r.convex << " ratio=" << r.ratio_increasing
       << " log=" << r.log_increasing << ")";
    r.diagnostic = os.str();
    return r;
  }

  const ConvexGauge psi = ConvexGauge::shifted_log(beta, r.L);
  const ConvexGauge phi = ConvexGauge::log_type(beta);
  double c = 1.0;
  double ci = 1.0;
  for (double x : sample) {
    const double q = psi(x) / phi(x);
    c = std::max({c, q, 1.0 / q});
    const double qi = psi.inverse(x) * std::pow(std::log(r.L + x), beta) / x;
    ci = std::max({ci, qi, 1.0 / qi});
  }
  r.comparability = c;
  r.inverse_comparability = ci;
  return r;
}

}  // namespace halfheat
