#pragma once

// Oscillation-magnitude schedules f: N -> [0, 1), monotone decreasing.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <utility>

#include "martosc/common.hpp"

namespace martosc {

enum class ScheduleKind { finite, log_squared, constant_band, custom };

inline const char* to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::finite: return "finite";
    case ScheduleKind::log_squared: return "log_squared";
    case ScheduleKind::constant_band: return "constant_band";
    case ScheduleKind::custom: return "custom";
  }
  return "?";
}

class Schedule {
 public:
  using Fn = std::function<double(std::uint64_t)>;

  /// `memoize` caches f(t) for small t; worth it when f is computed by inversion.
  Schedule(ScheduleKind kind, std::string name, Fn f, double sum_bound, bool memoize = false)
      : kind_(kind),
        name_(std::move(name)),
        f_(std::make_shared<const Fn>(std::move(f))),
        memo_(memoize ? std::make_shared<Memo>() : nullptr),
        sum_bound_(sum_bound) {}

  double operator()(std::uint64_t t) const {
    if (!memo_ || t >= Memo::kSize) return (*f_)(t);
    // f is pure, so racing writers store the same value.
    std::atomic<double>& slot = memo_->values[t];
    double v = slot.load(std::memory_order_relaxed);
    if (v < 0.0) {
      v = (*f_)(t);
      slot.store(v, std::memory_order_relaxed);
    }
    return v;
  }

  ScheduleKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  /// Certified upper bound on sum_{i>=1} f(i); +inf for non-summable schedules.
  double sum_bound() const { return sum_bound_; }
  bool summable() const { return std::isfinite(sum_bound_); }

 private:
  ScheduleKind kind_;
  std::string name_;
  struct Memo {
    static constexpr std::uint64_t kSize = std::uint64_t{1} << 16;
    std::unique_ptr<std::atomic<double>[]> values;
    Memo() : values(new std::atomic<double>[kSize]) {
      for (std::uint64_t i = 0; i < kSize; ++i) values[i].store(-1.0, std::memory_order_relaxed);
    }
  };

  std::shared_ptr<const Fn> f_;
  std::shared_ptr<Memo> memo_;
  double sum_bound_;
};

namespace detail {

/// Solves g(exp(y)) = target for y in [y_lo, y_hi], g strictly decreasing in
/// eps = exp(y) with g(exp(y_lo)) >= target >= g(exp(y_hi)). Bisecting in log
/// space gives full relative precision on tiny eps. Returns the endpoint with
/// g >= target, i.e. never overestimates the inverse.
template <class G>
double invert_decreasing_log(G&& g, double target, double y_lo, double y_hi) {
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (y_lo + y_hi);
    if (mid <= y_lo || mid >= y_hi) return std::exp(y_lo);
    if (g(std::exp(mid)) >= target) {
      y_lo = mid;
    } else {
      y_hi = mid;
    }
  }
  throw InternalError("schedule inversion did not converge in 200 iterations");
}

inline const double kLogTiny = std::log(1e-300);

}  // namespace detail

/// f(t) = delta / (2m) for t <= m, 0 afterwards.
inline Schedule schedule_finite(double delta, std::uint64_t m) {
  require_domain(delta > 0.0 && delta < 0.5, "schedule_finite: delta must lie in (0, 1/2)");
  require_domain(m >= 1, "schedule_finite: m must be >= 1");
  const double level = delta / (2.0 * static_cast<double>(m));
  return Schedule(ScheduleKind::finite,
                  "finite(" + std::to_string(delta) + "," + std::to_string(m) + ")",
                  [level, m](std::uint64_t t) { return t <= m ? level : 0.0; }, delta / 2.0);
}

/// f = g^{-1} with g(eps) = 2 delta (1 / (eps ln^2 eps) - e^2 / 4) on (0, e^-2].
/// sum_{t>=1} f(t) <= delta / 2.
inline Schedule schedule_log_squared(double delta) {
  require_domain(delta > 0.0 && delta < 0.5, "schedule_log_squared: delta must lie in (0, 1/2)");
  const double e2 = std::numbers::e * std::numbers::e;
  auto g = [delta, e2](double eps) {
    const double l = std::log(eps);
    return 2.0 * delta * (1.0 / (eps * l * l) - e2 / 4.0);
  };
  return Schedule(ScheduleKind::log_squared, "log_squared(" + std::to_string(delta) + ")",
                  [g](std::uint64_t t) {
                    if (t == 0) return std::exp(-2.0);
                    return detail::invert_decreasing_log(g, static_cast<double>(t), detail::kLogTiny, -2.0);
                  },
                  delta / 2.0, true);
}

/// Constant f = (b - a) / (b + a); not summable.
inline Schedule schedule_constant_band(double a, double b) {
  require_domain(a > 0.0, "schedule_constant_band: a must be positive");
  require_domain(b > a, "schedule_constant_band: b must exceed a");
  const double level = (b - a) / (b + a);
  return Schedule(ScheduleKind::constant_band,
                  "constant_band(" + std::to_string(a) + "," + std::to_string(b) + ")",
                  [level](std::uint64_t) { return level; }, std::numeric_limits<double>::infinity());
}

/// Non-summable f = g^{-1} with g(eps) = a / (eps ln(1/eps)) - b on (0, c],
/// where c <= 1/e is chosen with g(c) = 1 (or c = 1/e when g(1/e) >= 1).
/// f(t) = c for t <= g(c).
inline Schedule schedule_inverse_log(double a, double b) {
  require_domain(a > 0.0 && b > 0.0, "schedule_inverse_log: a and b must be positive");
  auto g = [a, b](double eps) { return a / (eps * std::log(1.0 / eps)) - b; };
  const double inv_e_log = -1.0;
  double c = std::exp(inv_e_log);
  if (g(c) < 1.0) c = detail::invert_decreasing_log(g, 1.0, detail::kLogTiny, inv_e_log);
  const double g_c = g(c);
  return Schedule(ScheduleKind::custom,
                  "inverse_log(" + std::to_string(a) + "," + std::to_string(b) + ")",
                  [g, c, g_c, inv_e_log](std::uint64_t t) {
                    const double target = static_cast<double>(t);
                    if (target <= g_c) return c;
                    return detail::invert_decreasing_log(g, target, detail::kLogTiny, inv_e_log);
                  },
                  std::numeric_limits<double>::infinity(), true);
}

}  // namespace martosc
