#include <catch_amalgamated.hpp>

#include <random>

#include "martosc/crossings.hpp"
#include "martosc/oscillator.hpp"
#include "martosc/rng.hpp"
#include "oracles.hpp"

using namespace martosc;

namespace {

std::vector<double> sample_values(const PrefixMeasure& P, const MartingaleProcess& X, std::uint64_t horizon,
                                  TrialStream& rng) {
  MeasureCursor pc = P.cursor();
  ProcessCursor xc = X.start();
  std::vector<double> values{*xc.value()};
  for (std::uint64_t t = 0; t < horizon && !xc.absorbed(); ++t) {
    const auto cond = pc.conditionals();
    const Symbol a = rng.symbol(cond);
    xc.advance(cond, a);
    pc.advance(a);
    values.push_back(*xc.value());
  }
  return values;
}

std::vector<double> random_path(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

}  // namespace

TEST_CASE("upcrossing counts on small paths", "[crossings]") {
  const auto t = count_upcrossings({1, 0.5, 1.5, 0.5, 1.5}, 1.0, 0.3);
  CHECK(t.count == 2);
  CHECK(t.stop_times == std::vector<std::size_t>{1, 2, 3, 4});
  CHECK(count_upcrossings({1, 1, 1}, 1.0, 0.5).count == 0);
  // Index 0 is the anchor T_0 and never a low visit.
  CHECK(count_upcrossings({0.5, 1.5}, 1.0, 0.5).count == 0);
  CHECK(count_upcrossings({0.5, 0.5, 1.5}, 1.0, 0.5).count == 1);
  // An unfinished excursion leaves an odd stop time behind.
  const auto open = count_upcrossings({1, 0.2, 1.9, 0.1}, 1.0, 0.5);
  CHECK(open.count == 1);
  CHECK(open.stop_times.size() == 3);
  CHECK_THROWS_AS(count_upcrossings({1, 2}, 1.0, 0.0), DomainError);
}

TEST_CASE("tally invariants", "[crossings][property]") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto v = random_path(gen, 50);
    const auto t = count_upcrossings(v, 1.0, 0.4);
    REQUIRE(t.count * 2 <= t.stop_times.size());
    REQUIRE(t.stop_times.size() <= t.count * 2 + 1);
    for (std::size_t i = 0; i < t.stop_times.size(); ++i) {
      if (i > 0) REQUIRE(t.stop_times[i] > t.stop_times[i - 1]);
      const double x = v[t.stop_times[i]];
      if (i % 2 == 0) REQUIRE(x <= 0.6 + 1e-12);
      else REQUIRE(x >= 1.4 - 1e-12);
    }
  }
}

TEST_CASE("scan agrees with exhaustive stopping-sequence search on grid paths", "[crossings][oracle]") {
  const std::vector<std::pair<double, double>> bands = {{1.0, 0.5}, {1.0, 0.25}, {0.75, 0.25}, {1.25, 0.25},
                                                        {0.5, 0.5}, {1.5, 0.5},  {1.0, 1.0}};
  for (std::uint32_t bits = 0; bits < (1u << 14); ++bits) {
    const auto v = oracle::grid_path(bits, 14);
    for (auto [c, eps] : bands) {
      const auto expected = oracle::brute_force_upcrossings(v, c - eps, c + eps);
      REQUIRE(count_upcrossings(v, c, eps).count == static_cast<std::uint64_t>(expected));
    }
  }
}

TEST_CASE("upcrossing monotonicity", "[crossings][property]") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto v = random_path(gen, 80);
    // A narrower band inside a wider one is crossed at least as often.
    REQUIRE(count_upcrossings(v, 1.0, 0.2).count >= count_upcrossings(v, 1.0, 0.5).count);
    REQUIRE(count_upcrossings(v, 1.1, 0.3).count >= count_upcrossings(v, 1.0, 0.5).count);
    // Prefixes never have more.
    const std::vector<double> prefix(v.begin(), v.begin() + 40);
    REQUIRE(count_upcrossings(prefix, 1.0, 0.3).count <= count_upcrossings(v, 1.0, 0.3).count);
  }
}

TEST_CASE("alternation counts", "[crossings]") {
  auto a = count_alternations({0.9, 0.4, 0.9}, 0.4);
  CHECK(a.count == 2);
  CHECK(a.chain == std::vector<AlternationChain>{AlternationChain::down_first, AlternationChain::down_first});
  CHECK(a.times == std::vector<std::size_t>{1, 2});
  CHECK(count_alternations({0.5, 0.5, 0.5}, 0.1).count == 0);
  a = count_alternations({0.1, 0.6, 0.1}, 0.5);
  CHECK(a.count == 2);
  CHECK(a.chain.front() == AlternationChain::up_first);
  // Anchors move only at achieved stops, not with running extremes: the rise
  // 0.2 -> 0.9 is measured from the starting value 0.5.
  CHECK(count_alternations({0.5, 0.2, 0.9, 0.4}, 0.5).count == 0);
  CHECK(count_alternations({0.5, 0.2, 1.0, 0.5}, 0.5).count == 2);
  CHECK_THROWS_AS(count_alternations({1, 2}, 0.0), DomainError);
}

TEST_CASE("E_{m,m} events", "[crossings]") {
  const auto f = schedule_finite(0.2, 3);
  const std::vector<double> flat(20, 1.0);
  CHECK(event_Emm(flat, f, 0));
  CHECK_FALSE(event_Emm(flat, f, 1));

  // A seeded oscillator path run to absorption: three completed upcrossings
  // make E_{3,3} hold, fewer make it fail.
  const auto P = bernoulli_measure(1.0 / 3.0);
  const auto X = build_oscillator(P, f);
  int complete = 0, incomplete = 0;
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    TrialStream rng(2024, trial);
    const auto v = sample_values(P, X, 100000, rng);
    const auto ups = count_upcrossings(v, 1.0, f(1)).count;
    REQUIRE(event_Emm(v, f, 3) == (ups >= 3));
    (ups >= 3 ? complete : incomplete)++;
  }
  CHECK(complete > 0);
  CHECK(incomplete > 0);
}

TEST_CASE("tightness criterion", "[crossings]") {
  const std::vector<std::vector<double>> bad = {{1, 1, 2, 1, 1.5}};
  const auto v = check_tightness_criterion(bad, 1.0, 2.0);
  CHECK_FALSE(v.pass);
  CHECK(v.failing_path == 0u);
  const std::vector<std::vector<double>> overshoot = {{1, 1, 2.5, 0}};
  CHECK_FALSE(check_tightness_criterion(overshoot, 1.0, 2.0).pass);
  const std::vector<std::vector<double>> constant = {{1, 1, 1, 1}};
  CHECK(check_tightness_criterion(constant, 1.0, 2.0).pass);

  const auto P = bernoulli_measure(0.5);
  const auto Y = doob_tight_process(1, 2, P);
  std::vector<std::vector<double>> paths;
  for (std::uint64_t trial = 0; trial < 5000; ++trial) {
    TrialStream rng(5, trial);
    paths.push_back(sample_values(P, Y, 400, rng));
  }
  CHECK(check_tightness_criterion(paths, 1.0, 2.0).pass);
}

TEST_CASE("alternations versus crossings on constant-schedule oscillators", "[crossings][property]") {
  // From the first low visit on, the up-first chain with alpha = 2f moves
  // exactly at the completed up- and downcrossings of [1 - f, 1 + f]. The
  // down-first chain can additionally fire on drops of 2f inside the low
  // region, so A(2f) is at least that count.
  for (double p : {1.0 / 3.0, 0.5}) {
    const auto P = bernoulli_measure(p);
    const auto f = schedule_constant_band(0.9, 1.1);
    const double fm = f(1);
    const auto X = build_oscillator(P, f);
    for (std::uint64_t trial = 0; trial < 20000; ++trial) {
      TrialStream rng(17, trial);
      const auto v = sample_values(P, X, 10000, rng);
      std::size_t first_low = 0;
      while (first_low < v.size() && v[first_low] > 1.0 - fm + 1e-12) ++first_low;
      if (first_low == v.size()) continue;
      // The low value is repeated so that it is both the alternation anchor
      // and the first low visit of the upcrossing scan.
      std::vector<double> tail{v[first_low]};
      tail.insert(tail.end(), v.begin() + first_low, v.end());
      std::vector<double> mirrored;
      for (double x : tail) mirrored.push_back(-x);
      const auto ups = count_upcrossings(tail, 1.0, fm).count;
      const auto downs = count_upcrossings(mirrored, -1.0, fm).count;
      detail::AlternationScan scan(2.0 * fm);
      for (std::size_t t = 0; t < tail.size(); ++t) scan.push(t, tail[t]);
      REQUIRE(scan.up_first_count() == ups + downs);
      REQUIRE(count_alternations(tail, 2.0 * fm).count >= ups + downs);
      REQUIRE(ups + downs <= 2 * ups + 1);
    }
  }
}
