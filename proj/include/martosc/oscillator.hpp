#pragma once

// The indefinitely oscillating martingale. Starting at 1, the process swings
// between 1 - f(M) and 1 + f(M), where M is one plus the number of completed
// upcrossings, and otherwise drifts to 0.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "martosc/common.hpp"
#include "martosc/martingale.hpp"
#include "martosc/measure.hpp"
#include "martosc/schedule.hpp"

namespace martosc {

struct OscillatorState {
  double x = 1.0;
  /// One plus the number of completed upcrossings.
  std::uint64_t m = 1;
  /// Reached <= 1 - f(m) since the last completed upcrossing.
  bool low_visited = false;
  /// The last step was a p_u = 0 passthrough.
  bool frozen = false;

  friend bool operator==(const OscillatorState&, const OscillatorState&) = default;
};

/// Symbols grouped as "a_u"; bit i set iff symbol i belongs to the group.
struct SymbolGroup {
  std::uint64_t mask = 0;
  double p_u = 0.0;

  bool contains(Symbol s) const { return (mask >> s) & 1u; }
  std::vector<Symbol> symbols() const {
    std::vector<Symbol> out;
    for (Symbol s = 0; s < 64; ++s)
      if (contains(s)) out.push_back(s);
    return out;
  }
};

inline constexpr std::size_t kMaxOscillatorAlphabet = 64;

/// Splits the alphabet into two non-empty groups and returns the one with
/// probability <= 1/2. Symbols are taken greedily by decreasing mass (ties to
/// the lower index) while the group total stays <= 1/2; for two symbols this is
/// the minority symbol, or symbol 0 on a tie.
inline SymbolGroup choose_symbol_group(std::span<const double> cond) {
  require_domain(cond.size() >= 2, "choose_symbol_group: need at least two symbols");
  require_domain(cond.size() <= kMaxOscillatorAlphabet, "choose_symbol_group: alphabet too large");
  if (cond.size() == 2) {
    if (cond[0] <= 0.5 && cond[0] >= cond[1]) return {0b01, cond[0]};
    if (cond[0] <= cond[1]) return {0b01, cond[0]};
    return {0b10, cond[1]};
  }
  std::array<Symbol, kMaxOscillatorAlphabet> order{};
  std::iota(order.begin(), order.begin() + cond.size(), Symbol{0});
  std::stable_sort(order.begin(), order.begin() + cond.size(),
                   [&](Symbol l, Symbol r) { return cond[l] > cond[r]; });
  SymbolGroup group;
  for (std::size_t i = 0; i < cond.size(); ++i) {
    const Symbol s = order[i];
    if (group.p_u + cond[s] <= 0.5) {
      group.p_u += cond[s];
      group.mask |= std::uint64_t{1} << s;
    }
  }
  if (group.mask == 0) {
    // Unreachable for conditionals summing to 1; keep the groups non-empty.
    const Symbol lightest = order[cond.size() - 1];
    group = {std::uint64_t{1} << lightest, cond[lightest]};
  }
  return group;
}

enum class OscillatorCase { passthrough, high, middle, low };

struct StepDetail {
  OscillatorCase branch = OscillatorCase::passthrough;
  double gamma = 0.0;
  double d = 0.0;
};

/// One transition of the oscillator with the current magnitude f(m) supplied.
///   high   (x >= 1):      group -> x + r (x - (1 - f)),   other -> 1 - f
///   middle (1 > x >= g):  group -> 1 + f (completes an upcrossing), other -> x - g
///   low    (otherwise):   group -> x - r d,  other -> x + d
/// with r = (1 - p_u) / p_u, g = (p_u / (1 - p_u)) (1 + f - x) and
/// d = min{ x / r, (1 - f) - x }. The second term of d is r g - 2f simplified;
/// whichever term is active, one successor lands exactly on 0 or 1 - f.
inline OscillatorState oscillator_step(const OscillatorState& s, double p_u, bool is_group_symbol,
                                       double magnitude, StepDetail* detail = nullptr) {
  OscillatorState next = s;
  next.frozen = false;
  if (p_u <= kZeroProbability) {
    next.frozen = true;
    if (detail) *detail = {};
    return next;
  }
  const double fm = magnitude;
  const double low_edge = 1.0 - fm;
  const double odds = p_u / (1.0 - p_u);
  const double inv_odds = (1.0 - p_u) / p_u;
  const double gamma = odds * (1.0 + fm - s.x);
  StepDetail info{OscillatorCase::high, gamma, 0.0};

  if (s.x >= 1.0) {
    next.x = is_group_symbol ? s.x + inv_odds * (s.x - low_edge) : low_edge;
  } else if (s.x >= gamma - kEdgeSlack) {
    // The slack keeps x = g (a low edge hit exactly) out of the low case, where
    // d would be 0 and the process would stall.
    info.branch = OscillatorCase::middle;
    if (is_group_symbol) {
      next.x = 1.0 + fm;
      if (s.low_visited) {
        next.m = s.m + 1;
        next.low_visited = false;
      }
    } else {
      next.x = std::max(0.0, s.x - gamma);
    }
  } else {
    info.branch = OscillatorCase::low;
    const double climb = odds * s.x;
    const double room = low_edge - s.x;
    if (climb < room) {
      info.d = climb;
      next.x = is_group_symbol ? 0.0 : s.x + climb;
    } else {
      info.d = room;
      next.x = is_group_symbol ? std::max(0.0, s.x - inv_odds * room) : low_edge;
    }
  }
  if (next.m == s.m && next.x <= low_edge + kEdgeSlack) next.low_visited = true;
  if (detail) *detail = info;
  return next;
}

inline OscillatorState oscillator_step(const OscillatorState& s, double p_u, bool is_group_symbol,
                                       const Schedule& f, StepDetail* detail = nullptr) {
  return oscillator_step(s, p_u, is_group_symbol, f(s.m), detail);
}

namespace detail {

class OscillatorProcessState final : public ProcessState {
 public:
  OscillatorProcessState(Schedule f, OscillatorState init, double scale, unsigned hold_steps)
      : f_(std::move(f)), s_(init), fm_(f_(init.m)), scale_(scale), hold_(hold_steps) {}

  std::unique_ptr<ProcessState> clone() const override {
    return std::make_unique<OscillatorProcessState>(*this);
  }

  void advance(std::span<const double> cond, Symbol next) override {
    if (hold_ > 0) {
      --hold_;
      return;
    }
    const SymbolGroup group = choose_symbol_group(cond);
    const std::uint64_t m_before = s_.m;
    s_ = oscillator_step(s_, group.p_u, group.contains(next), fm_);
    if (s_.m != m_before) fm_ = f_(s_.m);
  }

  std::optional<double> value() const override { return scale_ * s_.x; }

  bool absorbed() const override {
    return hold_ == 0 && (s_.x == 0.0 || (fm_ == 0.0 && s_.x == 1.0));
  }

  const OscillatorState& state() const { return s_; }
  double magnitude() const { return fm_; }
  double scale() const { return scale_; }

 private:
  Schedule f_;
  OscillatorState s_;
  double fm_;
  double scale_;
  unsigned hold_;
};

inline void require_perpetual_entropy(const PrefixMeasure& P, double eps, std::size_t depth) {
  require_domain(P.alphabet().size() <= kMaxOscillatorAlphabet, "oscillator: alphabet too large");
  // Shrink the checked depth until the prefix tree fits the enumeration guard.
  while (depth > 1) {
    try {
      checked_tree_size(P.alphabet().size(), depth + 1);
      break;
    } catch (const SizeError&) {
      --depth;
    }
  }
  const auto verdict = verify_perpetual_entropy(P, eps, depth);
  if (!verdict.pass) {
    throw ContractError("oscillator: " + P.name() + " fails the perpetual entropy check at prefix '" +
                        word_to_string(*verdict.first_failure) + "'");
  }
}

}  // namespace detail

/// Parameters of the perpetual-entropy precondition check.
struct EntropyCheck {
  double eps = 1e-6;
  std::size_t depth = 8;
};

/// The oscillating martingale for measure P and magnitude schedule f, X_0 = 1.
inline MartingaleProcess build_oscillator(const PrefixMeasure& P, const Schedule& f, EntropyCheck check = {}) {
  detail::require_perpetual_entropy(P, check.eps, check.depth);
  return MartingaleProcess("oscillator(" + f.name() + ")", [f] {
    return std::make_unique<detail::OscillatorProcessState>(f, OscillatorState{}, 1.0, 0u);
  });
}

/// Oscillator with the constant schedule (b - a) / (b + a), started at
/// X_0 = X_1 = a / c and scaled by c = (a + b) / 2, so that it alternates
/// between exactly a and b and otherwise drifts to 0.
inline MartingaleProcess doob_tight_process(double a, double b, const PrefixMeasure& P, EntropyCheck check = {}) {
  const Schedule f = schedule_constant_band(a, b);
  detail::require_perpetual_entropy(P, check.eps, check.depth);
  const double c = 0.5 * (a + b);
  OscillatorState init;
  init.x = 1.0 - f(1);
  init.low_visited = true;
  return MartingaleProcess("doob_tight(" + std::to_string(a) + "," + std::to_string(b) + ")", [f, init, c] {
    return std::make_unique<detail::OscillatorProcessState>(f, init, c, 1u);
  });
}

}  // namespace martosc
