#pragma once

// Nonnegative martingales as prefix-driven state machines, the conversions
// between measures and martingales, and exact verification on finite trees.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "martosc/common.hpp"
#include "martosc/measure.hpp"

namespace martosc {

/// Evaluation state of a process at one prefix. `advance` receives the
/// reference measure's conditionals at the current prefix and the observed
/// symbol; the value must depend on nothing but the prefix.
class ProcessState {
 public:
  virtual ~ProcessState() = default;
  virtual std::unique_ptr<ProcessState> clone() const = 0;
  virtual void advance(std::span<const double> cond, Symbol next) = 0;
  /// Empty on prefixes where the process is undefined (reference-null prefixes).
  virtual std::optional<double> value() const = 0;
  /// True if every future value equals the current one, whatever is observed.
  virtual bool absorbed() const { return false; }
};

class ProcessCursor {
 public:
  explicit ProcessCursor(std::unique_ptr<ProcessState> state) : state_(std::move(state)) {}

  ProcessCursor(const ProcessCursor& other) : state_(other.state_->clone()), depth_(other.depth_) {}
  ProcessCursor& operator=(const ProcessCursor& other) {
    if (this != &other) {
      state_ = other.state_->clone();
      depth_ = other.depth_;
    }
    return *this;
  }
  ProcessCursor(ProcessCursor&&) noexcept = default;
  ProcessCursor& operator=(ProcessCursor&&) noexcept = default;

  void advance(std::span<const double> cond, Symbol next) {
    state_->advance(cond, next);
    ++depth_;
  }

  std::optional<double> value() const { return state_->value(); }
  bool defined() const { return state_->value().has_value(); }
  bool absorbed() const { return state_->absorbed(); }
  std::size_t depth() const { return depth_; }

  /// Access to the concrete state, for diagnostics of specific processes.
  template <class State>
  const State* state_as() const {
    return dynamic_cast<const State*>(state_.get());
  }

 private:
  std::unique_ptr<ProcessState> state_;
  std::size_t depth_ = 0;
};

struct ProcessTraits {
  bool nonnegative = true;
  /// Values stay in [0, 1]; enables the alternation bounds.
  bool unit_interval = false;
};

/// Immutable description of a process; every call to start() yields a fresh
/// cursor at the empty prefix.
class MartingaleProcess {
 public:
  using Factory = std::function<std::unique_ptr<ProcessState>()>;

  MartingaleProcess(std::string name, Factory factory, ProcessTraits traits = {})
      : name_(std::move(name)),
        factory_(std::make_shared<const Factory>(std::move(factory))),
        traits_(traits) {}

  ProcessCursor start() const { return ProcessCursor((*factory_)()); }
  const std::string& name() const { return name_; }
  const ProcessTraits& traits() const { return traits_; }

  double initial_value() const { return start().value().value(); }

  /// Value at prefix u, with the reference measure P supplying the context.
  std::optional<double> value_at(const PrefixMeasure& P, const Word& u) const {
    MeasureCursor pc = P.cursor();
    ProcessCursor xc = start();
    for (Symbol a : u) {
      require_domain(P.alphabet().contains(a), "symbol outside alphabet");
      xc.advance(pc.conditionals(), a);
      pc.advance(a);
    }
    return xc.value();
  }

 private:
  std::string name_;
  std::shared_ptr<const Factory> factory_;
  ProcessTraits traits_;
};

// --- simple processes -------------------------------------------------------

namespace detail {

class ConstantState final : public ProcessState {
 public:
  explicit ConstantState(double v) : v_(v) {}
  std::unique_ptr<ProcessState> clone() const override { return std::make_unique<ConstantState>(*this); }
  void advance(std::span<const double>, Symbol) override {}
  std::optional<double> value() const override { return v_; }
  bool absorbed() const override { return true; }

 private:
  double v_;
};

class DoublingState final : public ProcessState {
 public:
  std::unique_ptr<ProcessState> clone() const override { return std::make_unique<DoublingState>(*this); }
  void advance(std::span<const double>, Symbol next) override { x_ = next == 0 ? 2.0 * x_ : 0.5 * x_; }
  std::optional<double> value() const override { return x_; }

 private:
  double x_ = 1.0;
};

class BoundedWalkState final : public ProcessState {
 public:
  std::unique_ptr<ProcessState> clone() const override { return std::make_unique<BoundedWalkState>(*this); }
  void advance(std::span<const double>, Symbol next) override {
    const double step = 0.5 * std::min(x_, 1.0 - x_);
    x_ = next == 1 ? x_ + step : x_ - step;
  }
  std::optional<double> value() const override { return x_; }
  bool absorbed() const override { return x_ == 0.0 || x_ == 1.0; }

 private:
  double x_ = 0.5;
};

class QuotientState final : public ProcessState {
 public:
  explicit QuotientState(MeasureCursor q) : q_(std::move(q)) {}
  std::unique_ptr<ProcessState> clone() const override { return std::make_unique<QuotientState>(*this); }

  void advance(std::span<const double> cond, Symbol next) override {
    const double q = q_.conditional(next);
    const double p = cond[next];
    q_.advance(next);
    if (!defined_) return;
    if (p <= kZeroProbability) {
      if (x_ * q > 0.0) {
        throw AbsoluteContinuityError("quotient martingale: Q(u) > 0 on a prefix with P(u) = 0");
      }
      defined_ = false;
      return;
    }
    x_ *= q / p;
  }

  std::optional<double> value() const override {
    if (!defined_) return std::nullopt;
    return x_;
  }
  bool absorbed() const override { return defined_ && x_ == 0.0; }

 private:
  MeasureCursor q_;
  double x_ = 1.0;
  bool defined_ = true;
};

}  // namespace detail

inline MartingaleProcess constant_process(double v) {
  require_domain(v >= 0.0, "constant_process: value must be nonnegative");
  return MartingaleProcess("constant(" + std::to_string(v) + ")",
                           [v] { return std::make_unique<detail::ConstantState>(v); },
                           ProcessTraits{true, v <= 1.0});
}

/// X_0 = 1, doubled on symbol 0 and halved on symbol 1. A martingale under
/// Bernoulli(2/3), where it equals the Bernoulli(1/3) / Bernoulli(2/3) quotient.
inline MartingaleProcess doubling_process() {
  return MartingaleProcess("doubling", [] { return std::make_unique<detail::DoublingState>(); });
}

/// X_0 = 1/2, X_{t+1} = X_t +- min{X_t, 1 - X_t} / 2 (plus on symbol 1).
/// A [0,1]-valued martingale under the fair coin only.
inline MartingaleProcess bounded_walk_process() {
  return MartingaleProcess("bounded_walk", [] { return std::make_unique<detail::BoundedWalkState>(); },
                           ProcessTraits{true, true});
}

/// X(u) = Q(u) / P(u). Absolute continuity on cylinders is checked lazily on
/// visited prefixes; P-null prefixes evaluate to "undefined".
inline MartingaleProcess quotient_martingale(const PrefixMeasure& Q, const PrefixMeasure& P) {
  require_domain(Q.alphabet() == P.alphabet(), "quotient_martingale: alphabets differ");
  return MartingaleProcess("quotient(" + Q.name() + "/" + P.name() + ")",
                           [Q] { return std::make_unique<detail::QuotientState>(Q.cursor()); });
}

// --- exact verification -----------------------------------------------------

struct VerificationReport {
  std::size_t depth = 0;
  double max_martingale_defect = 0.0;
  /// max over t <= depth of |E[X_t] - X_0|.
  double max_expectation_defect = 0.0;
  double min_value = std::numeric_limits<double>::infinity();
  double tolerance = 1e-9;
  bool pass = true;
};

namespace detail {

struct TreeWalk {
  const PrefixMeasure& P;
  std::size_t depth;
  std::vector<double> level_mass;  // E[X_t] accumulators
  double max_defect = 0.0;
  double min_value = std::numeric_limits<double>::infinity();

  void visit(const MeasureCursor& pc, const ProcessCursor& xc, double prob, std::size_t t) {
    const double x = xc.value().value();
    level_mass[t] += prob * x;
    min_value = std::min(min_value, x);
    if (t == depth) return;
    auto cond = pc.conditionals();
    double expectation = 0.0;
    for (Symbol a = 0; a < cond.size(); ++a) {
      if (cond[a] <= kZeroProbability) continue;
      ProcessCursor child_x = xc;
      child_x.advance(cond, a);
      MeasureCursor child_p = pc;
      child_p.advance(a);
      expectation += cond[a] * child_x.value().value();
      visit(child_p, child_x, prob * cond[a], t + 1);
    }
    max_defect = std::max(max_defect, std::abs(expectation - x));
  }
};

}  // namespace detail

/// Exhaustively checks E[X(ua) | u] = X(u) on every P-positive prefix of
/// length < depth, plus E[X_t] = X_0 for t <= depth.
inline VerificationReport verify_martingale(const MartingaleProcess& X, const PrefixMeasure& P,
                                            std::size_t depth, double tol = 1e-9) {
  checked_tree_size(P.alphabet().size(), depth);
  detail::TreeWalk walk{P, depth, std::vector<double>(depth + 1, 0.0)};
  walk.visit(P.cursor(), X.start(), 1.0, 0);

  VerificationReport report;
  report.depth = depth;
  report.tolerance = tol;
  report.max_martingale_defect = walk.max_defect;
  report.min_value = walk.min_value;
  for (double mass : walk.level_mass) {
    report.max_expectation_defect =
        std::max(report.max_expectation_defect, std::abs(mass - walk.level_mass[0]));
  }
  report.pass = report.max_martingale_defect <= tol && report.max_expectation_defect <= tol &&
                report.min_value >= -tol;
  return report;
}

/// Exact E[X_t] = sum over u in Sigma^t of P(u) X(u).
inline double expected_value(const MartingaleProcess& X, const PrefixMeasure& P, std::size_t t) {
  checked_tree_size(P.alphabet().size(), t);
  detail::TreeWalk walk{P, t, std::vector<double>(t + 1, 0.0)};
  walk.visit(P.cursor(), X.start(), 1.0, 0);
  return walk.level_mass[t];
}

// --- martingale -> measure --------------------------------------------------

namespace detail {

class InducedState final : public MeasureState {
 public:
  InducedState(MeasureCursor p, ProcessCursor x) : p_(std::move(p)), x_(std::move(x)) { refresh(); }

  std::unique_ptr<MeasureState> clone() const override { return std::make_unique<InducedState>(*this); }
  std::span<const double> conditionals() const override { return cond_; }

  void advance(Symbol next) override {
    x_.advance(p_.conditionals(), next);
    p_.advance(next);
    refresh();
  }

 private:
  // q(ua) / q(u) = P(a | u) X(ua) / X(u). Where q(u) = 0 the conditionals are
  // irrelevant to cylinder values; P's are reported so they still sum to 1.
  void refresh() {
    auto pc = p_.conditionals();
    cond_.assign(pc.begin(), pc.end());
    const auto x = x_.value();
    if (!x || *x <= 0.0) return;
    for (Symbol a = 0; a < pc.size(); ++a) {
      if (pc[a] <= kZeroProbability) {
        cond_[a] = 0.0;
        continue;
      }
      ProcessCursor child = x_;
      child.advance(pc, a);
      cond_[a] = pc[a] * child.value().value() / *x;
    }
  }

  MeasureCursor p_;
  ProcessCursor x_;
  std::vector<double> cond_;
};

}  // namespace detail

/// The measure q with q(u) = X(u) P(u). X must pass verify_martingale against
/// P at `verify_depth` with E[X_0] = 1.
inline PrefixMeasure induced_measure(const MartingaleProcess& X, const PrefixMeasure& P,
                                     std::size_t verify_depth = 10, double tol = 1e-9) {
  const auto report = verify_martingale(X, P, verify_depth, tol);
  if (!report.pass) {
    throw ContractError("induced_measure: " + X.name() + " is not a nonnegative martingale under " +
                        P.name());
  }
  if (std::abs(X.initial_value() - 1.0) > tol) {
    throw ContractError("induced_measure: " + X.name() + " does not have expectation 1");
  }
  return PrefixMeasure(P.alphabet(), "induced(" + X.name() + "," + P.name() + ")",
                       [X, P] { return std::make_unique<detail::InducedState>(P.cursor(), X.start()); });
}

}  // namespace martosc
