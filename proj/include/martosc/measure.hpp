#pragma once

// Probability measures on infinite strings, represented by their next-symbol
// conditionals. A measure is never materialized beyond cylinder values.

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "martosc/common.hpp"

namespace martosc {

class Alphabet {
 public:
  explicit Alphabet(std::size_t size) : size_(size) {
    require_domain(size >= 2, "alphabet needs at least two symbols");
  }

  std::size_t size() const { return size_; }
  bool contains(Symbol s) const { return s < size_; }

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::size_t size_;
};

/// Evaluation state of a measure at one prefix. Implementations are small
/// state machines advanced one symbol at a time.
class MeasureState {
 public:
  virtual ~MeasureState() = default;
  virtual std::unique_ptr<MeasureState> clone() const = 0;
  /// Next-symbol probabilities at the current prefix; one entry per symbol.
  virtual std::span<const double> conditionals() const = 0;
  virtual void advance(Symbol next) = 0;
};

/// Value-semantic handle walking a measure along a prefix.
class MeasureCursor {
 public:
  explicit MeasureCursor(std::unique_ptr<MeasureState> state, Alphabet alphabet)
      : state_(std::move(state)), alphabet_(alphabet) {}

  MeasureCursor(const MeasureCursor& other)
      : state_(other.state_->clone()), alphabet_(other.alphabet_), depth_(other.depth_) {}
  MeasureCursor& operator=(const MeasureCursor& other) {
    if (this != &other) {
      state_ = other.state_->clone();
      alphabet_ = other.alphabet_;
      depth_ = other.depth_;
    }
    return *this;
  }
  MeasureCursor(MeasureCursor&&) noexcept = default;
  MeasureCursor& operator=(MeasureCursor&&) noexcept = default;

  std::span<const double> conditionals() const { return state_->conditionals(); }
  double conditional(Symbol a) const { return state_->conditionals()[a]; }

  void advance(Symbol a) {
    require_domain(alphabet_.contains(a), "symbol outside alphabet");
    state_->advance(a);
    ++depth_;
  }

  std::size_t depth() const { return depth_; }
  const Alphabet& alphabet() const { return alphabet_; }

 private:
  std::unique_ptr<MeasureState> state_;
  Alphabet alphabet_;
  std::size_t depth_ = 0;
};

/// A probability measure on infinite strings over a finite alphabet, given by
/// its conditional next-symbol probabilities. Immutable and cheap to copy.
class PrefixMeasure {
 public:
  using Factory = std::function<std::unique_ptr<MeasureState>()>;

  PrefixMeasure(Alphabet alphabet, std::string name, Factory factory)
      : alphabet_(alphabet),
        name_(std::move(name)),
        factory_(std::make_shared<const Factory>(std::move(factory))) {}

  const Alphabet& alphabet() const { return alphabet_; }
  const std::string& name() const { return name_; }

  MeasureCursor cursor() const { return MeasureCursor((*factory_)(), alphabet_); }

  MeasureCursor cursor_at(const Word& u) const {
    MeasureCursor c = cursor();
    for (Symbol a : u) c.advance(a);
    return c;
  }

  std::vector<double> conditionals(const Word& u) const {
    auto c = cursor_at(u);
    auto span = c.conditionals();
    return {span.begin(), span.end()};
  }

  double cond(const Word& u, Symbol a) const {
    require_domain(alphabet_.contains(a), "symbol outside alphabet");
    return cursor_at(u).conditional(a);
  }

 private:
  Alphabet alphabet_;
  std::string name_;
  std::shared_ptr<const Factory> factory_;
};

/// Product of conditionals along u; the empty cylinder has probability 1.
inline double cylinder_prob(const PrefixMeasure& m, const Word& u) {
  MeasureCursor c = m.cursor();
  double prob = 1.0;
  for (Symbol a : u) {
    require_domain(m.alphabet().contains(a), "cylinder_prob: symbol outside alphabet");
    prob *= c.conditional(a);
    c.advance(a);
  }
  return prob;
}

namespace detail {

class IidState final : public MeasureState {
 public:
  explicit IidState(std::shared_ptr<const std::vector<double>> probs) : probs_(std::move(probs)) {}
  std::unique_ptr<MeasureState> clone() const override { return std::make_unique<IidState>(*this); }
  std::span<const double> conditionals() const override { return *probs_; }
  void advance(Symbol) override {}

 private:
  std::shared_ptr<const std::vector<double>> probs_;
};

}  // namespace detail

/// i.i.d. measure with the given per-symbol probabilities.
inline PrefixMeasure iid_measure(std::vector<double> probs, std::string name = {}) {
  Alphabet alphabet(probs.size());
  double total = 0.0;
  for (double p : probs) {
    require_domain(p >= 0.0 && p <= 1.0, "iid_measure: probabilities must lie in [0,1]");
    total += p;
  }
  require_domain(std::abs(total - 1.0) <= 1e-12, "iid_measure: probabilities must sum to 1");
  if (name.empty()) name = "iid";
  auto shared = std::make_shared<const std::vector<double>>(std::move(probs));
  return PrefixMeasure(alphabet, std::move(name),
                       [shared] { return std::make_unique<detail::IidState>(shared); });
}

/// Binary i.i.d. measure; p is the probability of symbol 1.
inline PrefixMeasure bernoulli_measure(double p) {
  require_domain(p >= 0.0 && p <= 1.0, "bernoulli_measure: p must lie in [0,1]");
  return iid_measure({1.0 - p, p}, "bernoulli(" + std::to_string(p) + ")");
}

struct PerpetualEntropyVerdict {
  bool pass = true;
  std::size_t prefixes_checked = 0;
  /// Shortest (then lexicographically first) prefix without a witness.
  std::optional<Word> first_failure;
  /// For each passing prefix, the lowest symbol whose conditional lies strictly
  /// inside (eps, 1 - eps).
  std::vector<std::pair<Word, Symbol>> witnesses;
};

/// Checks a decidable sufficient condition for perpetual entropy: every prefix
/// of length <= depth with positive probability has a next symbol whose
/// conditional lies strictly inside (eps, 1 - eps). Witnesses at later offsets
/// are not searched, so a FAIL does not refute perpetual entropy.
inline PerpetualEntropyVerdict verify_perpetual_entropy(const PrefixMeasure& m, double eps,
                                                        std::size_t depth) {
  require_domain(eps > 0.0 && eps < 0.5, "verify_perpetual_entropy: eps must lie in (0, 1/2)");
  require_domain(depth >= 1, "verify_perpetual_entropy: depth must be >= 1");
  checked_tree_size(m.alphabet().size(), depth);

  struct Node {
    Word prefix;
    MeasureCursor cursor;
  };
  PerpetualEntropyVerdict verdict;
  std::deque<Node> queue;
  queue.push_back({Word{}, m.cursor()});
  while (!queue.empty()) {
    Node node = std::move(queue.front());
    queue.pop_front();
    ++verdict.prefixes_checked;
    auto cond = node.cursor.conditionals();
    std::optional<Symbol> witness;
    for (Symbol a = 0; a < cond.size(); ++a) {
      if (cond[a] > eps && cond[a] < 1.0 - eps) {
        witness = a;
        break;
      }
    }
    if (!witness) {
      verdict.pass = false;
      verdict.first_failure = node.prefix;
      return verdict;
    }
    verdict.witnesses.emplace_back(node.prefix, *witness);
    if (node.prefix.size() == depth) continue;
    for (Symbol a = 0; a < cond.size(); ++a) {
      if (cond[a] <= kZeroProbability) continue;
      Node child{node.prefix, node.cursor};
      child.prefix.push_back(a);
      child.cursor.advance(a);
      queue.push_back(std::move(child));
    }
  }
  return verdict;
}

}  // namespace martosc
