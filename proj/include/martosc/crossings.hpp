#pragma once

// Upcrossing and alternation counts over recorded value paths. Index 0 of a
// path is X_0 and anchors every stopping-time chain (T_0 = 0); no stop time
// is ever placed at index 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <vector>

#include "martosc/common.hpp"
#include "martosc/schedule.hpp"

namespace martosc {

/// The band [c - eps, c + eps].
struct Band {
  double c = 1.0;
  double eps = 0.5;

  double lo() const { return c - eps; }
  double hi() const { return c + eps; }

  static Band from_edges(double a, double b) { return {0.5 * (a + b), 0.5 * (b - a)}; }
  friend bool operator==(const Band&, const Band&) = default;
};

struct CrossingTally {
  std::uint64_t count = 0;
  /// T_1, T_2, ...: odd entries are low visits, even entries completed upcrossings.
  std::vector<std::size_t> stop_times;
  Band band;
};

enum class AlternationChain { down_first, up_first };

struct AlternationTally {
  std::uint64_t count = 0;
  double alpha = 0.0;
  /// T'_1, T'_2, ... and the chain that reached each one first.
  std::vector<std::size_t> times;
  std::vector<AlternationChain> chain;
};

namespace detail {

/// Single-pass realization of T_{2k+1} = inf{t > T_{2k} : X_t <= c - eps},
/// T_{2k+2} = inf{t > T_{2k+1} : X_t >= c + eps}.
class UpcrossingScan {
 public:
  enum class Event { none, low, up };

  explicit UpcrossingScan(Band band) : lo_(band.lo() + kEdgeSlack), hi_(band.hi() - kEdgeSlack) {}

  Event push(std::size_t t, double x) {
    if (t == 0) return Event::none;
    if (!waiting_up_) {
      if (x <= lo_) {
        waiting_up_ = true;
        return Event::low;
      }
    } else if (x >= hi_) {
      waiting_up_ = false;
      ++count_;
      return Event::up;
    }
    return Event::none;
  }

  std::uint64_t count() const { return count_; }
  /// A low visit happened and the matching upcrossing has not completed.
  bool pending_up() const { return waiting_up_; }

 private:
  double lo_;
  double hi_;
  bool waiting_up_ = false;
  std::uint64_t count_ = 0;
};

/// One anchored alternation chain; `down` selects the first direction.
class AlternationChainScan {
 public:
  AlternationChainScan(double alpha, bool down_first) : alpha_(alpha), want_down_(down_first) {}

  bool push(std::size_t t, double x) {
    if (t == 0) {
      anchor_ = x;
      return false;
    }
    const bool hit = want_down_ ? x <= anchor_ - alpha_ + kEdgeSlack : x >= anchor_ + alpha_ - kEdgeSlack;
    if (hit) {
      anchor_ = x;
      want_down_ = !want_down_;
      ++count_;
    }
    return hit;
  }

  std::uint64_t count() const { return count_; }

 private:
  double alpha_;
  bool want_down_;
  double anchor_ = 0.0;
  std::uint64_t count_ = 0;
};

/// Both chains; the alternation count is the larger of the two.
class AlternationScan {
 public:
  explicit AlternationScan(double alpha) : down_(alpha, true), up_(alpha, false) {}

  void push(std::size_t t, double x) {
    down_.push(t, x);
    up_.push(t, x);
  }
  std::uint64_t count() const { return std::max(down_.count(), up_.count()); }
  std::uint64_t down_first_count() const { return down_.count(); }
  std::uint64_t up_first_count() const { return up_.count(); }

 private:
  AlternationChainScan down_;
  AlternationChainScan up_;
};

}  // namespace detail

/// Counts completed upcrossings of [c - eps, c + eps].
template <std::ranges::input_range R>
CrossingTally count_upcrossings(R&& values, double c, double eps) {
  require_domain(eps > 0.0, "count_upcrossings: eps must be positive");
  CrossingTally tally;
  tally.band = {c, eps};
  detail::UpcrossingScan scan(tally.band);
  std::size_t t = 0;
  for (double x : values) {
    if (scan.push(t, x) != detail::UpcrossingScan::Event::none) tally.stop_times.push_back(t);
    ++t;
  }
  tally.count = scan.count();
  return tally;
}

inline CrossingTally count_upcrossings(std::initializer_list<double> values, double c, double eps) {
  return count_upcrossings(std::span<const double>(values.begin(), values.size()), c, eps);
}

/// E_{m,m}: for every k <= m the path completed at least k upcrossings of
/// [1 - f(k), 1 + f(k)]. Requires f(k) > 0 for k <= m.
template <std::ranges::forward_range R>
bool event_Emm(R&& values, const Schedule& f, std::uint64_t m) {
  for (std::uint64_t k = 1; k <= m; ++k) {
    const double fk = f(k);
    require_domain(fk > 0.0, "event_Emm: schedule vanishes at a level <= m");
    if (count_upcrossings(values, 1.0, fk).count < k) return false;
  }
  return true;
}

/// Counts alpha-alternations: two anchored chains, one first waiting for a drop
/// of at least alpha below its anchor and one first waiting for a rise; each
/// achieved stop re-anchors its chain and flips the direction. The count is
/// the larger chain count.
template <std::ranges::input_range R>
AlternationTally count_alternations(R&& values, double alpha) {
  require_domain(alpha > 0.0, "count_alternations: alpha must be positive");
  detail::AlternationChainScan down(alpha, true);
  detail::AlternationChainScan up(alpha, false);
  std::vector<std::size_t> down_times;
  std::vector<std::size_t> up_times;
  std::size_t t = 0;
  for (double x : values) {
    if (down.push(t, x)) down_times.push_back(t);
    if (up.push(t, x)) up_times.push_back(t);
    ++t;
  }
  AlternationTally tally;
  tally.alpha = alpha;
  tally.count = std::max(down.count(), up.count());
  for (std::size_t k = 0; k < tally.count; ++k) {
    const bool has_down = k < down_times.size();
    const bool has_up = k < up_times.size();
    if (has_down && (!has_up || down_times[k] <= up_times[k])) {
      tally.times.push_back(down_times[k]);
      tally.chain.push_back(AlternationChain::down_first);
    } else {
      tally.times.push_back(up_times[k]);
      tally.chain.push_back(AlternationChain::up_first);
    }
  }
  return tally;
}

inline AlternationTally count_alternations(std::initializer_list<double> values, double alpha) {
  return count_alternations(std::span<const double>(values.begin(), values.size()), alpha);
}

struct TightnessVerdict {
  bool pass = true;
  std::optional<std::size_t> failing_path;
  std::string reason;
};

/// Checks the two conditions under which Doob's upcrossing bound
/// E[U_t(a,b)] <= E[max{a - X_t, 0}] / (b - a) holds with equality:
/// (a) after the first value <= a, no value lies strictly inside (a, b);
/// (b) every odd stop value equals a and every even one equals b (within 1e-9).
template <class Paths>
TightnessVerdict check_tightness_criterion(const Paths& value_paths, double a, double b) {
  require_domain(a > 0.0 && b > a, "check_tightness_criterion: need 0 < a < b");
  constexpr double tol = 1e-9;
  TightnessVerdict verdict;
  std::size_t index = 0;
  for (const auto& path : value_paths) {
    const std::vector<double> values(std::ranges::begin(path), std::ranges::end(path));
    bool seen_low = false;
    for (double x : values) {
      if (x <= a + tol) seen_low = true;
      if (seen_low && x > a + tol && x < b - tol) {
        verdict = {false, index, "value strictly between a and b after the first visit to a"};
        return verdict;
      }
    }
    const auto tally = count_upcrossings(values, 0.5 * (a + b), 0.5 * (b - a));
    for (std::size_t i = 0; i < tally.stop_times.size(); ++i) {
      const double x = values[tally.stop_times[i]];
      const double target = i % 2 == 0 ? a : b;
      if (std::abs(x - target) > tol) {
        verdict = {false, index, i % 2 == 0 ? "downcrossing not completed at a" : "upcrossing not completed at b"};
        return verdict;
      }
    }
    ++index;
  }
  return verdict;
}

}  // namespace martosc
