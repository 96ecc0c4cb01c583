// martosc_lab: simulate, enumerate and check upcrossing bounds for the
// oscillating martingale and friends.
//
// Exit status: 0 when every verdict holds, 1 on a violated bound or failed
// verification, 2 on usage or configuration errors.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "martosc/lab/config.hpp"
#include "martosc/lab/engine.hpp"
#include "martosc/lab/report.hpp"
#include "martosc/martosc.hpp"

namespace {

using namespace martosc;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed, trials, horizon;
  std::optional<std::string> out, measure, schedule, process;
  std::optional<unsigned> workers;
  bool tallies = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--trials", o.trials, "number of sampled paths")->check(CLI::PositiveNumber);
  cmd->add_option("--horizon", o.horizon, "path length")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--measure", o.measure, "bernoulli:p | iid:p0,p1,...");
  cmd->add_option("--schedule", o.schedule, "finite:delta,m | logsq:delta | band:a,b | invlog:a,b");
  cmd->add_option("--process", o.process, "oscillator | doob_tight | quotient | bounded_walk | doubling | constant");
  cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
  cmd->add_flag("--tallies", o.tallies, "also write per-path tallies.csv");
}

lab::LabConfig build_config(const Overrides& o) {
  lab::LabConfig cfg = o.config.empty() ? lab::LabConfig{} : lab::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.out) cfg.out_dir = *o.out;
  if (o.measure) cfg.measure = *o.measure;
  if (o.schedule) cfg.schedule = *o.schedule;
  if (o.process) cfg.process = *o.process;
  if (o.workers) cfg.workers = *o.workers;
  if (o.tallies) cfg.tallies = true;
  return cfg;
}

void print_written(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

int cmd_run(const Overrides& o, bool exact) {
  lab::LabConfig cfg = build_config(o);
  if (exact && !o.horizon && o.config.empty()) cfg.horizon = 12;
  const lab::RunSummary s = exact ? lab::run_exact(cfg) : lab::run_monte_carlo(cfg);
  print_written(lab::emit_reports(s, cfg.out_dir));
  std::cout << lab::format_bound_table(s.reports);
  if (s.verification) {
    const auto& v = *s.verification;
    std::printf("martingale defect %.3g, expectation defect %.3g, min value %.3g: %s\n", v.max_martingale_defect,
                v.max_expectation_defect, v.min_value, v.pass ? "pass" : "fail");
  }
  if (!exact) std::printf("in-progress crossing fraction at horizon: %.6g\n", s.in_progress);
  std::fprintf(stderr, "elapsed %.2fs\n", s.wall_seconds);
  const bool ok = s.all_hold() && (!s.verification || s.verification->pass);
  return ok ? 0 : 1;
}

int cmd_verify(const Overrides& o, std::size_t depth, double tol) {
  const lab::LabConfig cfg = build_config(o);
  const lab::Resolved r = lab::resolve(cfg);
  const VerificationReport v = verify_martingale(r.process, r.measure, depth, tol);
  const auto entropy = verify_perpetual_entropy(r.measure, EntropyCheck{}.eps, std::min<std::size_t>(depth, 8));
  nlohmann::ordered_json j = lab::to_json(v);
  j["process"] = r.process.name();
  j["measure"] = r.measure.name();
  j["perpetual_entropy"] = entropy.pass ? "pass" : "fail";
  std::cout << j.dump(2) << '\n';
  if (o.out) {
    lab::ensure_dir(*o.out);
    lab::write_file(std::filesystem::path(*o.out) / "verification.json", j.dump(2) + "\n");
  }
  return v.pass ? 0 : 1;
}

int cmd_bounds(const Overrides& o, bool exact, bool csv) {
  lab::LabConfig cfg = build_config(o);
  const lab::RunSummary s = exact ? lab::run_exact(cfg) : lab::run_monte_carlo(cfg);
  std::vector<BoundReport> reports = s.reports;
  const GapExample gap = dubins_gap_example();
  reports.push_back(make_report("dubins_vs_oscillator_gap(delta=0.2,k=3)", BoundKind::upper, 0.021, gap.gap, 0.0, 0));
  std::cout << (csv ? lab::bounds_csv(reports) : lab::format_bound_table(reports));
  if (o.out) {
    lab::ensure_dir(*o.out);
    lab::write_file(std::filesystem::path(*o.out) / "bounds.csv", lab::bounds_csv(reports));
  }
  return s.all_hold() ? 0 : 1;
}

int cmd_mdl(const Overrides& o, double delta, std::uint64_t m) {
  lab::LabConfig cfg = build_config(o);
  if (!o.measure && o.config.empty()) cfg.measure = "bernoulli:0.3333333333333333";
  const PrefixMeasure P = lab::parse_measure(cfg.measure);
  const auto result = mdl_oscillation_experiment(P, delta, m, cfg.horizon, cfg.trials, cfg.seed, cfg.workers);
  print_written(lab::emit_mdl_report(result, cfg.out_dir));
  std::cout << lab::to_json(result).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oscillating martingale laboratory"};
  app.require_subcommand(1);

  Overrides o;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run with bound reports");
  add_common(simulate, o);

  auto* exact = app.add_subcommand("exact", "exact enumeration over all prefixes up to the horizon");
  add_common(exact, o);

  std::size_t depth = 10;
  double tol = 1e-9;
  auto* verify = app.add_subcommand("verify", "exact martingale check of the configured process");
  add_common(verify, o);
  verify->add_option("--depth", depth, "enumeration depth");
  verify->add_option("--tol", tol, "defect tolerance");

  bool bounds_exact = false, bounds_csv = false;
  auto* bounds = app.add_subcommand("bounds", "table of every bound with its empirical counterpart");
  add_common(bounds, o);
  bounds->add_flag("--exact", bounds_exact, "use exact enumeration instead of sampling");
  bounds->add_flag("--csv", bounds_csv, "print CSV instead of an aligned table");

  double delta = 0.2;
  std::uint64_t m = 3;
  auto* mdl = app.add_subcommand("mdl-demo", "MDL flips between P and the oscillator-induced measure");
  add_common(mdl, o);
  mdl->add_option("--delta", delta, "schedule delta in (0, 1/2)");
  mdl->add_option("--m", m, "number of oscillation levels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_run(o, false);
    if (*exact) return cmd_run(o, true);
    if (*verify) return cmd_verify(o, depth, tol);
    if (*bounds) return cmd_bounds(o, bounds_exact, bounds_csv);
    if (*mdl) return cmd_mdl(o, delta, m);
  } catch (const lab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const SizeError& e) {
    std::cerr << "too large: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
