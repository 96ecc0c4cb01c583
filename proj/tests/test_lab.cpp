#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "martosc/lab/config.hpp"
#include "martosc/lab/engine.hpp"
#include "martosc/lab/report.hpp"

using namespace martosc;
using namespace martosc::lab;
using Catch::Matchers::WithinAbs;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("martosc_test_lab_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

LabConfig oscillator_config(std::uint64_t horizon, std::uint64_t trials) {
  LabConfig cfg;
  cfg.measure = "bernoulli:0.333333333333333333";
  cfg.schedule = "finite:0.2,3";
  cfg.horizon = horizon;
  cfg.trials = trials;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("measure and schedule strings", "[lab][config]") {
  CHECK_THAT(cylinder_prob(parse_measure("bernoulli:0.25"), word_from_string("1")), WithinAbs(0.25, 1e-15));
  CHECK(parse_measure("iid:0.2,0.3,0.5").alphabet().size() == 3);
  CHECK_THROWS_AS(parse_measure("bernoulli:1.5"), ConfigError);
  CHECK_THROWS_AS(parse_measure("bernoulli"), ConfigError);
  CHECK_THROWS_AS(parse_measure("coin:0.5"), ConfigError);
  CHECK_THROWS_AS(parse_measure("bernoulli:x"), ConfigError);

  const auto f = parse_schedule("finite:0.2,3");
  CHECK_THAT(f(1), WithinAbs(0.2 / 6.0, 1e-15));
  CHECK(f(4) == 0.0);
  CHECK(parse_schedule("logsq:0.2")(1) > 0.0);
  CHECK_THAT(parse_schedule("band:1,2")(7), WithinAbs(1.0 / 3.0, 1e-15));
  CHECK(parse_schedule("invlog:1,2")(1) > 0.0);
  CHECK(parse_schedule("log_squared:0.2")(3) == parse_schedule("logsq:0.2")(3));
  CHECK(parse_schedule("constant_band:1,2")(1) == parse_schedule("band:1,2")(1));
  CHECK_THROWS_AS(parse_schedule("finite:0.2,2.5"), ConfigError);
  CHECK_THROWS_AS(parse_schedule("finite:0.7,3"), ConfigError);
  CHECK_THROWS_AS(parse_schedule("bogus:1"), ConfigError);

  const auto bands = parse_bands("1:0.1, 0.5:0.25");
  REQUIRE(bands.size() == 2);
  CHECK(bands[1].c == 0.5);
  CHECK(bands[1].eps == 0.25);
  CHECK_THROWS_AS(parse_bands("1-0.1"), ConfigError);
}

TEST_CASE("INI loading", "[lab][config]") {
  const auto cfg = load_config(std::string(MARTOSC_CONFIG_DIR) + "/bounded_walk.ini");
  CHECK(cfg.process == "bounded_walk");
  CHECK(cfg.horizon == 2000);
  CHECK(cfg.k_cap == 4);
  REQUIRE(cfg.bands.size() == 1);
  CHECK(cfg.bands[0].eps == 0.1);
  CHECK(cfg.alphas == std::vector<double>{0.2});

  const auto dir = scratch("ini");
  {
    std::ofstream(dir / "bad.ini") << "[run]\ntrials = many\n";
    std::ofstream(dir / "broken.ini") << "[run\n";
  }
  CHECK_THROWS_AS(load_config((dir / "bad.ini").string()), ConfigError);
  CHECK_THROWS_AS(load_config((dir / "broken.ini").string()), ConfigError);
  CHECK_THROWS_AS(load_config((dir / "missing.ini").string()), ConfigError);
}

TEST_CASE("derived bands and alternation levels", "[lab][config]") {
  LabConfig cfg = oscillator_config(10, 1);
  auto r = resolve(cfg);
  REQUIRE(r.bands.size() == 1);
  CHECK_THAT(r.bands[0].eps, WithinAbs(0.2 / 6.0, 1e-15));
  CHECK(r.emm_m == 3);

  cfg.process = "doob_tight";
  cfg.measure = "bernoulli:0.5";
  r = resolve(cfg);
  CHECK(r.bands[0].lo() == 1.0);
  CHECK(r.bands[0].hi() == 2.0);

  cfg.process = "bounded_walk";
  r = resolve(cfg);
  CHECK(r.alphas == std::vector<double>{0.2});

  cfg.process = "nonsense";
  CHECK_THROWS_AS(resolve(cfg), ConfigError);
  cfg.process = "quotient";
  CHECK_THROWS_AS(resolve(cfg), ConfigError);
  cfg.process = "oscillator";
  cfg.measure = "bernoulli:1";
  CHECK_THROWS_AS(resolve(cfg), ConfigError);
  cfg = oscillator_config(0, 1);
  CHECK_THROWS_AS(resolve(cfg), ConfigError);
}

TEST_CASE("a constant process never crosses", "[lab]") {
  LabConfig cfg;
  cfg.process = "constant";
  cfg.value = 1.0;
  cfg.bands = {{1.0, 0.5}, {0.8, 0.1}};
  cfg.horizon = 50;
  cfg.trials = 300;
  cfg.tallies = true;
  const auto s = run_monte_carlo(cfg);
  REQUIRE(s.tallies.size() == 600);
  for (const auto& t : s.tallies) {
    REQUIRE(t.upcrossings == 0);
    REQUIRE(t.alternations == 0);
  }
  for (const auto& b : s.bands) {
    CHECK(b.mean_u == 0.0);
    for (double p : b.p_at_least) CHECK(p == 0.0);
  }
  CHECK(s.all_hold());
  for (double m : s.mean_value) CHECK(m == 1.0);
}

TEST_CASE("Monte Carlo summaries do not depend on the worker count", "[lab]") {
  LabConfig cfg = oscillator_config(400, 5000);
  cfg.tallies = true;
  cfg.workers = 1;
  const auto a = run_monte_carlo(cfg);
  cfg.workers = 3;
  const auto b = run_monte_carlo(cfg);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(tallies_csv(a.tallies) == tallies_csv(b.tallies));
  cfg.seed = 12;
  CHECK(to_json(run_monte_carlo(cfg)).dump() != to_json(a).dump());
}

TEST_CASE("exact enumeration keeps E[X_t] at X_0", "[lab][exact]") {
  const auto s = run_exact(oscillator_config(12, 1));
  REQUIRE(s.verification);
  CHECK(s.verification->pass);
  CHECK(s.verification->max_martingale_defect < 1e-9);
  REQUIRE(s.mean_value.size() == 13);
  for (double m : s.mean_value) REQUIRE_THAT(m, WithinAbs(1.0, 1e-9));
  CHECK(s.mode == "exact");
  CHECK(s.all_hold());

  auto big = oscillator_config(40, 1);
  CHECK_THROWS_AS(run_exact(big), SizeError);
}

TEST_CASE("exact and sampled crossing statistics agree", "[lab][exact]") {
  // Both runs use the band (1 - 1/30, 1 + 1/30) derived from finite:0.2,3.
  const auto exact = run_exact(oscillator_config(12, 1));
  const auto mc = run_monte_carlo(oscillator_config(12, 40000));
  REQUIRE(exact.bands.size() == 1);
  REQUIRE(mc.bands.size() == 1);
  const auto& e = exact.bands[0];
  const auto& m = mc.bands[0];
  CHECK_THAT(e.band.lo(), WithinAbs(29.0 / 30.0, 1e-15));
  CHECK(std::abs(e.mean_u - m.mean_u) <= 3.0 * m.se_u);
  CHECK(std::abs(e.p_at_least[0] - m.p_at_least[0]) <= 3.0 * m.se_at_least[0]);
  // Later E[X_t] is carried by paths of probability near 3^-t, which a sample
  // of this size does not see, so only the first steps are compared.
  for (std::size_t t = 0; t <= 4; ++t)
    REQUIRE(std::abs(mc.mean_value[t] - exact.mean_value[t]) <= 3.0 * mc.se_value[t] + 1e-12);
}

TEST_CASE("report files", "[lab][report]") {
  CHECK(bands_csv(RunSummary{}) == std::string(kBandsHeader) + "\n");
  CHECK(bounds_csv({}) == std::string(kBoundsHeader) + "\n");

  LabConfig cfg = oscillator_config(300, 2500);
  cfg.tallies = true;
  const auto s = run_monte_carlo(cfg);
  const auto d1 = scratch("r1");
  const auto d2 = scratch("r2");
  const auto w1 = emit_reports(s, d1);
  const auto w2 = emit_reports(run_monte_carlo(cfg), d2);
  REQUIRE(w1.size() == 5);
  REQUIRE(w2.size() == 5);
  for (std::size_t i = 0; i < w1.size(); ++i) {
    CHECK(w1[i].filename() == w2[i].filename());
    CHECK(slurp(w1[i]) == slurp(w2[i]));
  }
  const auto json = nlohmann::json::parse(slurp(d1 / "summary.json"));
  CHECK(json["mode"] == "monte_carlo");
  CHECK(json["trials"] == 2500);
  CHECK(slurp(d1 / "bands.csv").rfind(kBandsHeader, 0) == 0);

  const auto mdl = mdl_oscillation_experiment(bernoulli_measure(1.0 / 3.0), 0.2, 3, 100, 50, 1);
  const auto files = emit_mdl_report(mdl, scratch("mdl"));
  CHECK(nlohmann::json::parse(slurp(files[1]))["threshold"] == 5);

  const auto table = format_bound_table(s.reports);
  CHECK(table.rfind("name", 0) == 0);
}
