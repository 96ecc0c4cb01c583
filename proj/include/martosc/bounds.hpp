#pragma once

// Closed-form upcrossing and alternation bounds, and the reports pairing
// them with empirical estimates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "martosc/common.hpp"
#include "martosc/schedule.hpp"

namespace martosc {

enum class BoundKind { upper, lower };
enum class Verdict { holds, violated, tight };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::tight: return "tight";
  }
  return "?";
}

struct BoundReport {
  std::string name;
  BoundKind kind = BoundKind::upper;
  double theoretical = 0.0;
  double empirical = 0.0;
  double std_err = 0.0;
  std::uint64_t n = 0;
  Verdict verdict = Verdict::holds;
};

/// Verdict rule: an upper bound holds iff empirical <= theoretical + 3 se, a
/// lower bound iff empirical >= theoretical - 3 se. A holding bound is marked
/// tight when the estimate sits within 3 se of it (1e-9 for exact values).
inline Verdict judge(BoundKind kind, double theoretical, double empirical, double std_err) {
  const double band = std_err > 0.0 ? 3.0 * std_err : 1e-9;
  const bool ok = kind == BoundKind::upper ? empirical <= theoretical + band : empirical >= theoretical - band;
  if (!ok) return Verdict::violated;
  return std::abs(empirical - theoretical) <= band ? Verdict::tight : Verdict::holds;
}

inline BoundReport make_report(std::string name, BoundKind kind, double theoretical, double empirical,
                               double std_err, std::uint64_t n) {
  BoundReport r{std::move(name), kind, theoretical, empirical, std_err, n, Verdict::holds};
  r.verdict = judge(kind, theoretical, empirical, std_err);
  return r;
}

/// Dubins: P[U(c - eps, c + eps) >= k] <= ((c - eps)/(c + eps))^k min{x0/(c - eps), 1},
/// specialized to a deterministic X_0 = x0.
inline double dubins_bound(double c, double eps, std::uint64_t k, double x0) {
  require_domain(eps > 0.0 && c > eps, "dubins_bound: need c > eps > 0");
  require_domain(x0 >= 0.0, "dubins_bound: x0 must be nonnegative");
  const double a = c - eps;
  return std::pow(a / (c + eps), static_cast<double>(k)) * std::min(x0 / a, 1.0);
}

/// E[U_t(c - eps, c + eps)] <= E[max{c - eps - X_t, 0}] / (2 eps).
inline double doob_bound_xu(double c, double eps, double mean_shortfall) {
  require_domain(eps > 0.0, "doob_bound_xu: eps must be positive");
  require_domain(mean_shortfall >= 0.0, "doob_bound_xu: shortfall must be nonnegative");
  (void)c;
  return mean_shortfall / (2.0 * eps);
}

/// Uniform version for nonnegative processes: the shortfall is at most c - eps.
inline double doob_bound_xu_cap(double c, double eps) {
  require_domain(eps > 0.0 && c > eps, "doob_bound_xu_cap: need c > eps > 0");
  return (c - eps) / (2.0 * eps);
}

/// E[U_t(a, b)] <= E[max{X_t - a, 0}] / (b - a).
inline double doob_bound_classic(double a, double b, double mean_excess_at_t) {
  require_domain(b > a, "doob_bound_classic: need b > a");
  require_domain(mean_excess_at_t >= 0.0, "doob_bound_classic: excess must be nonnegative");
  return mean_excess_at_t / (b - a);
}

/// E[U_t(a, b)] <= (E[max{X_t - a, 0}] - E[max{X_0 - a, 0}]) / (b - a).
inline double doob_bound_durrett(double a, double b, double mean_excess_at_t, double mean_excess_at_0) {
  require_domain(b > a, "doob_bound_durrett: need b > a");
  require_domain(mean_excess_at_t >= 0.0 && mean_excess_at_0 >= 0.0,
                 "doob_bound_durrett: excesses must be nonnegative");
  return (mean_excess_at_t - mean_excess_at_0) / (b - a);
}

/// P(E_{m,m}) >= 1 - sum_{i=1}^m 2 f(i), floored at 0.
inline double lower_bound_oscillation_event(const Schedule& f, std::uint64_t m) {
  double sum = 0.0;
  for (std::uint64_t i = 1; i <= m; ++i) sum += 2.0 * f(i);
  return std::max(0.0, 1.0 - sum);
}

/// E[U(1 - f(m), 1 + f(m))] >= m (1 - delta).
inline double lower_bound_mean_upcrossings(std::uint64_t m, double delta) {
  require_domain(delta > 0.0 && delta < 0.5, "lower_bound_mean_upcrossings: delta must lie in (0, 1/2)");
  return static_cast<double>(m) * (1.0 - delta);
}

/// Upcrossing count guaranteed with probability >= 1 - delta by the
/// log-squared oscillator: delta / (eps ln^2(1/eps)), valid for eps < 0.015.
inline double log_squared_upcrossing_count(double delta, double eps) {
  require_domain(delta > 0.0, "log_squared_upcrossing_count: delta must be positive");
  if (!(eps > 0.0 && eps < 0.015)) throw DomainError("log_squared_upcrossing_count: only valid for 0 < eps < 0.015");
  const double l = std::log(1.0 / eps);
  return delta / (eps * l * l);
}

inline void require_alpha(double alpha, const char* who) {
  require_domain(alpha > 0.0 && alpha < 1.0, std::string(who) + ": alpha must lie in (0, 1)");
}

/// Davis: P[A(alpha) >= 2k] <= ((1 - alpha)/(1 + alpha))^{2k} for [0,1]-valued martingales.
inline double davis_bound(double alpha, std::uint64_t k) {
  require_alpha(alpha, "davis_bound");
  return std::pow((1.0 - alpha) / (1.0 + alpha), 2.0 * static_cast<double>(k));
}

/// P[A(alpha) >= 2k] <= ((1 - alpha)/(1 + alpha))^k.
inline double alternation_tail_bound(double alpha, std::uint64_t k) {
  require_alpha(alpha, "alternation_tail_bound");
  return std::pow((1.0 - alpha) / (1.0 + alpha), static_cast<double>(k));
}

/// E[A(alpha)] <= 1 / alpha.
inline double alternation_mean_bound(double alpha) {
  require_alpha(alpha, "alternation_mean_bound");
  return 1.0 / alpha;
}

struct GapExample {
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;
};

/// With delta = 0.2 and k = 3 upcrossings of [1 - delta/(2k), 1 + delta/(2k)]:
/// the oscillator achieves probability >= 1 - delta while Dubins allows at
/// most ((1 - delta/(2k))/(1 + delta/(2k)))^k.
inline GapExample dubins_gap_example() {
  constexpr double delta = 0.2;
  constexpr int k = 3;
  const double f = delta / (2.0 * k);
  GapExample g;
  g.lower = 1.0 - delta;
  g.upper = std::pow((1.0 - f) / (1.0 + f), k);
  g.gap = g.upper - g.lower;
  if (!(g.gap > 0.0 && g.gap < 0.021)) throw InternalError("gap example out of range");
  return g;
}

}  // namespace martosc
