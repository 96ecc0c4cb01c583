#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace martosc {

using Symbol = std::uint32_t;
using Word = std::vector<Symbol>;

/// Conditional probabilities at or below this are treated as exactly zero
/// when deciding between the p_u = 0 passthrough and the oscillation cases.
inline constexpr double kZeroProbability = 1e-15;

/// Slack for band-edge comparisons. Band edges are assigned exactly by the
/// oscillator, but scaled or derived edges (c - eps, c * (a / c)) may be off by
/// a few ulps.
inline constexpr double kEdgeSlack = 1e-12;

/// Largest enumeration tree the exact routines will walk.
inline constexpr std::uint64_t kEnumerationLimit = std::uint64_t{1} << 24;

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition between components does not hold.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Q(u) > 0 was observed on a prefix with P(u) = 0.
class AbsoluteContinuityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_domain(bool ok, std::string_view what) {
  if (!ok) throw DomainError(std::string(what));
}

/// Parses "0110" style words; each character must be a decimal digit.
inline Word word_from_string(std::string_view text) {
  Word w;
  w.reserve(text.size());
  for (char ch : text) {
    require_domain(ch >= '0' && ch <= '9', "word_from_string: symbols must be digits");
    w.push_back(static_cast<Symbol>(ch - '0'));
  }
  return w;
}

inline std::string word_to_string(const Word& w) {
  std::string out;
  out.reserve(w.size());
  for (Symbol s : w) out.push_back(static_cast<char>('0' + s));
  return out;
}

/// |alphabet|^depth, saturating, with the enumeration guard applied.
inline std::uint64_t checked_tree_size(std::size_t alphabet_size, std::size_t depth) {
  std::uint64_t leaves = 1;
  for (std::size_t i = 0; i < depth; ++i) {
    if (leaves > kEnumerationLimit / alphabet_size) {
      throw SizeError("enumeration of " + std::to_string(alphabet_size) + "^" +
                      std::to_string(depth) + " prefixes exceeds 2^24");
    }
    leaves *= alphabet_size;
  }
  return leaves;
}

}  // namespace martosc
