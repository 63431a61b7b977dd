#pragma once

// Convex gauges Phi used to build supersolutions 2 Phi^{-1}(G(t) Phi(f)), and the
// functionals A(tau) = Phi^{-1}(tau)^p / tau and B(tau) = tau / Phi^{-1}(tau).

#include <string>
#include <vector>

namespace halfheat {

enum class GaugeKind { identity, power, log_type, shifted_log };

std::string to_string(GaugeKind kind);

class ConvexGauge {
 public:
  static ConvexGauge identity();
  /// tau^alpha, alpha >= 1.
  static ConvexGauge power(double alpha);
  /// tau [log(e + tau)]^beta, beta > 0.
  static ConvexGauge log_type(double beta);
  /// tau [log(L + tau)]^beta, beta > 0, L >= e.
  static ConvexGauge shifted_log(double beta, double L);

  GaugeKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double shift() const { return L_; }
  std::string describe() const;

  double operator()(double tau) const;
  /// Phi^{-1}; closed form for identity and power, bracketed bisection in log tau otherwise.
  double inverse(double tau) const;

  /// Phi^{-1}(tau)^p / tau, with its limit at tau = 0.
  double A(double tau, double p) const;
  /// tau / Phi^{-1}(tau), with its limit at tau = 0.
  double B(double tau) const;

 private:
  ConvexGauge(GaugeKind kind, double alpha, double beta, double L) : kind_(kind), alpha_(alpha), beta_(beta), L_(L) {}

  GaugeKind kind_;
  double alpha_;
  double beta_;
  double L_;
};

/// Secant checks of the shifted-log gauge Psi(s) = s [log(L + s)]^beta on a log-spaced sample.
struct ShiftedLogSearch {
  bool found = false;
  double beta = 0.0;
  double L = 0.0;
  int doublings = 0;
  bool convex = false;            // (a) Psi positive and convex
  bool ratio_increasing = false;  // (b) s^p / Psi(s) increasing
  bool log_increasing = false;    // (c) s^eps [log(L + s)]^{-beta p} increasing
  /// Smallest C with C^{-1} Phi <= Psi <= C Phi on the sample (Phi the log-type gauge).
  double comparability = 0.0;
  /// Smallest C with C^{-1} <= Psi^{-1}(tau) [log(L + tau)]^beta / tau <= C on the sample.
  double inverse_comparability = 0.0;
  std::string diagnostic;

  ConvexGauge gauge() const;
};

struct ShiftedLogChecks {
  bool convex = false;
  bool ratio_increasing = false;
  bool log_increasing = false;
};

/// Log-spaced sample of `count` points over [lo, hi].
std::vector<double> log_sample(double lo, double hi, int count);

ShiftedLogChecks check_shifted_log(double beta, double L, double p, double eps, const std::vector<double>& sample);

/// Doubles L from e until (a)-(c) hold on 10^3 points of [1e-8, 1e8]; gives up beyond L = e^64.
ShiftedLogSearch shifted_log_gauge(double beta, double p, double eps);

}  // namespace halfheat
