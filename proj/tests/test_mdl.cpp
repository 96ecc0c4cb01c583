#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "martosc/mdl.hpp"

using namespace martosc;

namespace {

ModelClass three_coins(double shift = 0.0) {
  return ModelClass({{bernoulli_measure(0.2), 2.0 + shift},
                     {bernoulli_measure(0.5), 2.5 + shift},
                     {bernoulli_measure(0.7), 3.0 + shift}});
}

Word random_word(std::mt19937_64& gen, std::size_t n, double p) {
  std::bernoulli_distribution b(p);
  Word w(n);
  for (auto& a : w) a = b(gen) ? 1 : 0;
  return w;
}

}  // namespace

TEST_CASE("model classes obey the Kraft inequality", "[mdl]") {
  CHECK_NOTHROW(ModelClass({{bernoulli_measure(0.5), 1.0}, {bernoulli_measure(0.3), 1.0}}));
  CHECK_THROWS_AS(ModelClass({{bernoulli_measure(0.5), 0.5}, {bernoulli_measure(0.3), 0.5}}), DomainError);
  CHECK_THROWS_AS(ModelClass({}), DomainError);
  CHECK_THROWS_AS(ModelClass({{bernoulli_measure(0.5), 1.0}, {iid_measure({0.2, 0.3, 0.5}), 2.0}}), DomainError);
}

TEST_CASE("MDL selection basics", "[mdl]") {
  const ModelClass same({{bernoulli_measure(0.5), 1.0}, {bernoulli_measure(0.5), 1.0}});
  CHECK(mdl_select(same, {}) == 0);
  CHECK(mdl_select(same, word_from_string("0110101")) == 0);
  const ModelClass cheaper({{bernoulli_measure(0.5), 2.0}, {bernoulli_measure(0.5), 1.0}});
  CHECK(mdl_select(cheaper, {}) == 1);
  // Ones are likelier under the second coin: 1 - 3 log2(0.9) beats 1 + 3.
  const ModelClass coins({{bernoulli_measure(0.5), 1.0}, {bernoulli_measure(0.9), 1.0}});
  CHECK(mdl_select(coins, word_from_string("111")) == 1);
  CHECK(mdl_select(coins, word_from_string("000")) == 0);
}

TEST_CASE("adding a constant to every complexity does not change the choice", "[mdl][property]") {
  std::mt19937_64 gen(3);
  const auto base = three_coins();
  const auto shifted = three_coins(1.0);
  for (int i = 0; i < 300; ++i) {
    const Word w = random_word(gen, 1 + i % 40, 0.4);
    REQUIRE(mdl_select(base, w) == mdl_select(shifted, w));
  }
}

TEST_CASE("flip counts do not depend on the order of the class", "[mdl][property]") {
  std::mt19937_64 gen(5);
  const auto fwd = three_coins();
  const ModelClass rev({fwd[2], fwd[1], fwd[0]});
  for (int i = 0; i < 200; ++i) {
    const Word w = random_word(gen, 60, 0.2 + 0.5 * (i % 3) / 2.0);
    const auto a = mdl_trace(fwd, w, w.size());
    const auto b = mdl_trace(rev, w, w.size());
    REQUIRE(a.flips == b.flips);
    for (std::size_t t = 0; t < a.selections.size(); ++t) REQUIRE(a.selections[t] == 2 - b.selections[t]);
  }
  CHECK_THROWS_AS(mdl_trace(fwd, word_from_string("01"), 3), DomainError);
}

TEST_CASE("P versus the oscillator measure: Q is chosen exactly where X > 1", "[mdl][property]") {
  const auto P = bernoulli_measure(1.0 / 3.0);
  const auto X = build_oscillator(P, schedule_finite(0.2, 3));
  const auto Q = induced_measure(X, P);
  const ModelClass cls({{P, 1.0}, {Q, 1.0}});
  Word w;
  std::function<void()> rec = [&] {
    const auto x = X.value_at(P, w);
    REQUIRE(x.has_value());
    REQUIRE(mdl_select(cls, w) == (std::log2(*x) > kMdlTieBits ? 1u : 0u));
    if (w.size() == 10) return;
    for (Symbol a = 0; a < 2; ++a) {
      w.push_back(a);
      rec();
      w.pop_back();
    }
  };
  rec();
}

TEST_CASE("the fast experiment path agrees with a full MDL replay", "[mdl][property]") {
  const auto P = bernoulli_measure(1.0 / 3.0);
  const auto X = build_oscillator(P, schedule_finite(0.2, 3));
  const auto Q = induced_measure(X, P);
  const ModelClass cls({{P, 1.0}, {Q, 1.0}});
  constexpr std::uint64_t horizon = 300;
  std::uint64_t total = 0;
  for (std::uint64_t trial = 0; trial < 300; ++trial) {
    TrialStream fast(99, trial);
    const auto flips = detail::mdl_flips_on_path(P, X, horizon, fast);
    // Regenerate the same symbols; after absorption any continuation works.
    TrialStream rng(99, trial);
    MeasureCursor pc = P.cursor();
    Word w;
    for (std::uint64_t t = 0; t < horizon; ++t) {
      const auto cond = pc.conditionals();
      const Symbol a = static_cast<Symbol>(rng.symbol(cond));
      pc.advance(a);
      w.push_back(a);
    }
    const auto trace = mdl_trace(cls, w, horizon);
    REQUIRE(trace.flips == flips);
    total += flips;
  }
  CHECK(total > 0);
}

TEST_CASE("oscillation experiment", "[mdl]") {
  const auto P = bernoulli_measure(1.0 / 3.0);
  const auto none = mdl_oscillation_experiment(P, 0.2, 0, 100, 10, 1);
  CHECK(none.fraction == 1.0);
  CHECK(none.threshold == -1);

  const auto a = mdl_oscillation_experiment(P, 0.2, 3, 2000, 3000, 42, 1);
  const auto b = mdl_oscillation_experiment(P, 0.2, 3, 2000, 3000, 42, 3);
  CHECK(a.flips == b.flips);
  CHECK(a.fraction == b.fraction);
  CHECK(a.threshold == 5);
  CHECK_THAT(a.guarantee, Catch::Matchers::WithinAbs(0.8, 1e-15));
  CHECK(a.slack == a.guarantee - a.fraction);
  std::uint64_t reached = 0;
  for (auto f : a.flips) reached += f >= 5;
  CHECK(a.fraction == double(reached) / 3000.0);
  const auto c = mdl_oscillation_experiment(P, 0.2, 3, 2000, 3000, 43, 1);
  CHECK(c.flips != a.flips);
  CHECK_THROWS_AS(mdl_oscillation_experiment(P, 0.2, 3, 10, 0, 1), DomainError);
}
