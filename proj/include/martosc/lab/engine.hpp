#pragma once

// Monte Carlo and exact-enumeration engines. Both feed the same weighted
// accumulator: a sampled path has weight 1, an enumerated prefix its
// probability. Paths stop as soon as the process is absorbed; one pushed value
// already triggers every crossing a constant tail could trigger.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "martosc/bounds.hpp"
#include "martosc/crossings.hpp"
#include "martosc/lab/config.hpp"
#include "martosc/martingale.hpp"
#include "martosc/parallel.hpp"
#include "martosc/rng.hpp"

namespace martosc::lab {

struct BandStats {
  Band band;
  std::vector<double> p_at_least;  // P[U >= k], k = 1..k_cap
  std::vector<double> se_at_least;
  double mean_u = 0.0;
  double se_u = 0.0;
  double mean_alternations = 0.0;  // A(2 eps)
  double mean_shortfall = 0.0;     // E[max{c - eps - X_T, 0}]
  double mean_excess = 0.0;        // E[max{X_T - (c - eps), 0}] as used by the bounds
  double mean_excess_direct = 0.0; // plain (weighted) mean of the same quantity
  double excess_0 = 0.0;
  // Standard errors of U minus each Doob-type integrand, per path.
  double se_xu = 0.0;
  double se_classic = 0.0;
  double se_durrett = 0.0;
  /// Paths waiting for an upcrossing at the horizon with a positive final value.
  double in_progress = 0.0;
};

struct AlternationStats {
  double alpha = 0.0;
  std::vector<double> p_at_least_2k;  // P[A >= 2k], k = 1..k_cap
  std::vector<double> se_at_least_2k;
  double mean_a = 0.0;
  double se_a = 0.0;
};

struct EmmStats {
  std::uint64_t m = 0;
  double f_m = 0.0;
  double prob = 0.0;  // P(E_{m,m})
  double se = 0.0;
  double mean_u = 0.0;  // E[U(1 - f(m), 1 + f(m))]
  double se_u = 0.0;
};

struct PathTally {
  std::uint64_t path_id = 0;
  Band band;
  std::uint64_t upcrossings = 0;
  std::uint64_t alternations = 0;
};

struct RunSummary {
  std::string mode;  // monte_carlo | exact
  std::string measure;
  std::string process;
  std::string schedule;
  std::uint64_t horizon = 0;
  std::uint64_t trials = 0;  // sampled paths; 0 for exact runs
  std::uint64_t seed = 0;
  double x0 = 0.0;
  std::vector<BandStats> bands;
  std::vector<AlternationStats> alternations;
  std::vector<EmmStats> emm;
  std::vector<double> mean_value;  // E[X_t], t = 0..horizon
  std::vector<double> se_value;
  std::optional<VerificationReport> verification;  // exact runs only
  std::vector<BoundReport> reports;
  double in_progress = 0.0;  // max over bands
  std::vector<PathTally> tallies;
  /// Not emitted, so report files stay byte-stable.
  double wall_seconds = 0.0;

  bool all_hold() const {
    return std::none_of(reports.begin(), reports.end(),
                        [](const BoundReport& r) { return r.verdict == Verdict::violated; });
  }
};

namespace detail {

struct Moments {
  double s = 0.0;
  double s2 = 0.0;

  void add(double w, double v) {
    s += w * v;
    s2 += w * v * v;
  }
  void merge(const Moments& o) {
    s += o.s;
    s2 += o.s2;
  }
  double mean(double n) const { return s / n; }
  /// Standard error of the mean; 0 for exact (weight-normalized) sums.
  double se(double n, bool exact) const {
    if (exact || n < 2.0) return 0.0;
    const double m = s / n;
    const double var = std::max(0.0, (s2 / n - m * m) * n / (n - 1.0));
    return std::sqrt(var / n);
  }
};

/// Crossing scans carried along one path.
struct Scans {
  std::vector<martosc::detail::UpcrossingScan> bands;
  std::vector<martosc::detail::AlternationScan> band_alts;
  std::vector<martosc::detail::AlternationScan> alts;
  std::vector<martosc::detail::UpcrossingScan> emm;

  void push(std::size_t t, double x) {
    for (auto& s : bands) s.push(t, x);
    for (auto& s : band_alts) s.push(t, x);
    for (auto& s : alts) s.push(t, x);
    for (auto& s : emm) s.push(t, x);
  }
};

struct Plan {
  std::vector<Band> bands;
  std::vector<double> alphas;
  std::vector<double> emm_levels;  // f(1..M)
  std::uint64_t k_cap = 8;
  std::uint64_t horizon = 0;
  double x0 = 0.0;
  /// Estimate E[max{X_T - a, 0}] as X_0 - a + E[max{a - X_T, 0}] (true for
  /// martingales). The direct sample mean is dominated by exponentially rare
  /// high paths and is useless at long horizons; the shortfall is bounded.
  bool excess_via_identity = false;

  Scans fresh() const {
    Scans s;
    for (const auto& b : bands) {
      s.bands.emplace_back(b);
      s.band_alts.emplace_back(2.0 * b.eps);
    }
    for (double a : alphas) s.alts.emplace_back(a);
    for (double f : emm_levels) s.emm.emplace_back(Band{1.0, f});
    return s;
  }
};

struct Accum {
  double weight = 0.0;
  std::vector<std::vector<Moments>> band_ge;  // [band][k-1]
  std::vector<Moments> band_u, band_alt, band_short, band_excess, band_d_xu, band_d_classic, band_d_durrett,
      band_pending, band_direct_excess;
  std::vector<std::vector<Moments>> alt_ge;
  std::vector<Moments> alt_a;
  std::vector<Moments> emm_hold, emm_u;
  std::vector<double> trace, trace2, tail, tail2;  // value trace with constant tails
  std::vector<PathTally> tallies;

  explicit Accum(const Plan& p)
      : band_ge(p.bands.size(), std::vector<Moments>(p.k_cap)),
        band_u(p.bands.size()),
        band_alt(p.bands.size()),
        band_short(p.bands.size()),
        band_excess(p.bands.size()),
        band_d_xu(p.bands.size()),
        band_d_classic(p.bands.size()),
        band_d_durrett(p.bands.size()),
        band_pending(p.bands.size()),
        band_direct_excess(p.bands.size()),
        alt_ge(p.alphas.size(), std::vector<Moments>(p.k_cap)),
        alt_a(p.alphas.size()),
        emm_hold(p.emm_levels.size()),
        emm_u(p.emm_levels.size()),
        trace(p.horizon + 1, 0.0),
        trace2(p.horizon + 1, 0.0),
        tail(p.horizon + 2, 0.0),
        tail2(p.horizon + 2, 0.0) {}

  void observe(std::size_t t, double w, double x) {
    trace[t] += w * x;
    trace2[t] += w * x * x;
  }

  /// Path (or prefix) finished at time t_end with value x; later times repeat x.
  void finish(const Plan& p, double w, const Scans& s, std::size_t t_end, double x_end, bool keep_tally,
              std::uint64_t path_id) {
    weight += w;
    tail[t_end + 1] += w * x_end;
    tail2[t_end + 1] += w * x_end * x_end;
    for (std::size_t i = 0; i < p.bands.size(); ++i) {
      const Band& b = p.bands[i];
      const double u = static_cast<double>(s.bands[i].count());
      for (std::size_t k = 1; k <= p.k_cap; ++k) band_ge[i][k - 1].add(w, u >= static_cast<double>(k) ? 1.0 : 0.0);
      band_u[i].add(w, u);
      band_alt[i].add(w, static_cast<double>(s.band_alts[i].count()));
      const double shortfall = std::max(b.lo() - x_end, 0.0);
      const double direct_excess = std::max(x_end - b.lo(), 0.0);
      const double excess = p.excess_via_identity ? p.x0 - b.lo() + shortfall : direct_excess;
      const double excess0 = std::max(p.x0 - b.lo(), 0.0);
      band_short[i].add(w, shortfall);
      band_excess[i].add(w, excess);
      band_direct_excess[i].add(w, direct_excess);
      band_d_xu[i].add(w, u - shortfall / (2.0 * b.eps));
      band_d_classic[i].add(w, u - excess / (b.hi() - b.lo()));
      band_d_durrett[i].add(w, u - (excess - excess0) / (b.hi() - b.lo()));
      band_pending[i].add(w, s.bands[i].pending_up() && x_end > 0.0 ? 1.0 : 0.0);
      if (keep_tally) tallies.push_back({path_id, b, s.bands[i].count(), s.band_alts[i].count()});
    }
    for (std::size_t i = 0; i < p.alphas.size(); ++i) {
      const double a = static_cast<double>(s.alts[i].count());
      for (std::size_t k = 1; k <= p.k_cap; ++k) alt_ge[i][k - 1].add(w, a >= 2.0 * static_cast<double>(k) ? 1.0 : 0.0);
      alt_a[i].add(w, a);
    }
    bool all = true;
    for (std::size_t i = 0; i < p.emm_levels.size(); ++i) {
      const std::uint64_t u = s.emm[i].count();
      all = all && u >= i + 1;
      emm_hold[i].add(w, all ? 1.0 : 0.0);
      emm_u[i].add(w, static_cast<double>(u));
    }
  }

  void merge(Accum&& o) {
    weight += o.weight;
    auto merge_vec = [](std::vector<Moments>& dst, const std::vector<Moments>& src) {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i].merge(src[i]);
    };
    for (std::size_t i = 0; i < band_ge.size(); ++i) merge_vec(band_ge[i], o.band_ge[i]);
    merge_vec(band_u, o.band_u);
    merge_vec(band_alt, o.band_alt);
    merge_vec(band_short, o.band_short);
    merge_vec(band_excess, o.band_excess);
    merge_vec(band_d_xu, o.band_d_xu);
    merge_vec(band_d_classic, o.band_d_classic);
    merge_vec(band_d_durrett, o.band_d_durrett);
    merge_vec(band_pending, o.band_pending);
    merge_vec(band_direct_excess, o.band_direct_excess);
    for (std::size_t i = 0; i < alt_ge.size(); ++i) merge_vec(alt_ge[i], o.alt_ge[i]);
    merge_vec(alt_a, o.alt_a);
    merge_vec(emm_hold, o.emm_hold);
    merge_vec(emm_u, o.emm_u);
    for (std::size_t t = 0; t < trace.size(); ++t) {
      trace[t] += o.trace[t];
      trace2[t] += o.trace2[t];
    }
    for (std::size_t t = 0; t < tail.size(); ++t) {
      tail[t] += o.tail[t];
      tail2[t] += o.tail2[t];
    }
    tallies.insert(tallies.end(), o.tallies.begin(), o.tallies.end());
  }
};

inline Plan make_plan(const LabConfig& cfg, const Resolved& r, bool exact) {
  Plan p;
  p.excess_via_identity = !exact;
  p.bands = r.bands;
  p.alphas = r.alphas;
  for (std::uint64_t m = 1; m <= r.emm_m && r.schedule; ++m) {
    const double f = (*r.schedule)(m);
    if (f <= 0.0) break;
    p.emm_levels.push_back(f);
  }
  p.k_cap = std::max<std::uint64_t>(cfg.k_cap, 1);
  p.horizon = cfg.horizon;
  p.x0 = r.process.initial_value();
  return p;
}

inline double value_or_throw(const ProcessCursor& xc) {
  const auto v = xc.value();
  if (!v) throw InternalError("process undefined on a sampled prefix");
  return *v;
}

}  // namespace detail

/// Fills `summary.reports` from its statistics.
inline void build_reports(RunSummary& s, const Resolved& r, bool exact) {
  const auto n = exact ? 0 : s.trials;
  s.reports.clear();
  for (const auto& b : s.bands) {
    const std::string tag = "[" + std::to_string(b.band.lo()) + "," + std::to_string(b.band.hi()) + "]";
    if (b.band.lo() > 0.0) {
      for (std::size_t k = 1; k <= b.p_at_least.size(); ++k) {
        s.reports.push_back(make_report("dubins" + tag + "k=" + std::to_string(k), BoundKind::upper,
                                        dubins_bound(b.band.c, b.band.eps, k, s.x0), b.p_at_least[k - 1],
                                        b.se_at_least[k - 1], n));
      }
    }
    s.reports.push_back(make_report("doob_xu" + tag, BoundKind::upper,
                                    doob_bound_xu(b.band.c, b.band.eps, b.mean_shortfall), b.mean_u, b.se_xu, n));
    if (r.process.traits().nonnegative && b.band.lo() > 0.0) {
      s.reports.push_back(make_report("doob_xu_cap" + tag, BoundKind::upper,
                                      doob_bound_xu_cap(b.band.c, b.band.eps), b.mean_u, b.se_u, n));
    }
    s.reports.push_back(make_report("doob_classic" + tag, BoundKind::upper,
                                    doob_bound_classic(b.band.lo(), b.band.hi(), b.mean_excess), b.mean_u,
                                    b.se_classic, n));
    s.reports.push_back(make_report("doob_durrett" + tag, BoundKind::upper,
                                    doob_bound_durrett(b.band.lo(), b.band.hi(), b.mean_excess, b.excess_0),
                                    b.mean_u, b.se_durrett, n));
  }
  // The E_{m,m} lower bounds are statements about the whole infinite path;
  // they are only reported for sampled runs, whose horizon can be long.
  if (!exact && r.schedule && r.schedule->summable()) {
    const double delta = 2.0 * r.schedule->sum_bound();
    for (const auto& e : s.emm) {
      s.reports.push_back(make_report("emm_prob_lower[m=" + std::to_string(e.m) + "]", BoundKind::lower,
                                      lower_bound_oscillation_event(*r.schedule, e.m), e.prob, e.se, n));
      if (delta > 0.0 && delta < 0.5) {
        s.reports.push_back(make_report("mean_upcrossings_lower[m=" + std::to_string(e.m) + "]", BoundKind::lower,
                                        lower_bound_mean_upcrossings(e.m, delta), e.mean_u, e.se_u, n));
      }
    }
  }
  if (r.process.traits().unit_interval) {
    for (const auto& a : s.alternations) {
      if (!(a.alpha > 0.0 && a.alpha < 1.0)) continue;
      const std::string tag = "[alpha=" + std::to_string(a.alpha) + "]";
      for (std::size_t k = 1; k <= a.p_at_least_2k.size(); ++k) {
        s.reports.push_back(make_report("alternation_tail" + tag + "k=" + std::to_string(k), BoundKind::upper,
                                        alternation_tail_bound(a.alpha, k), a.p_at_least_2k[k - 1], a.se_at_least_2k[k - 1], n));
      }
      s.reports.push_back(make_report("alternation_mean" + tag, BoundKind::upper, alternation_mean_bound(a.alpha), a.mean_a, a.se_a, n));
    }
  }
}

namespace detail {

inline RunSummary summarize(const LabConfig& cfg, const Resolved& r, const Plan& p, Accum& acc, bool exact) {
  RunSummary s;
  s.mode = exact ? "exact" : "monte_carlo";
  s.measure = r.measure.name();
  s.process = r.process.name();
  s.schedule = r.schedule ? r.schedule->name() : "";
  s.horizon = cfg.horizon;
  s.trials = exact ? 0 : cfg.trials;
  s.seed = exact ? 0 : cfg.seed;
  s.x0 = p.x0;
  const double n = acc.weight;
  for (std::size_t i = 0; i < p.bands.size(); ++i) {
    BandStats b;
    b.band = p.bands[i];
    for (const auto& m : acc.band_ge[i]) {
      b.p_at_least.push_back(m.mean(n));
      b.se_at_least.push_back(m.se(n, exact));
    }
    b.mean_u = acc.band_u[i].mean(n);
    b.se_u = acc.band_u[i].se(n, exact);
    b.mean_alternations = acc.band_alt[i].mean(n);
    b.mean_shortfall = acc.band_short[i].mean(n);
    b.mean_excess = acc.band_excess[i].mean(n);
    b.mean_excess_direct = acc.band_direct_excess[i].mean(n);
    b.excess_0 = std::max(p.x0 - b.band.lo(), 0.0);
    b.se_xu = acc.band_d_xu[i].se(n, exact);
    b.se_classic = acc.band_d_classic[i].se(n, exact);
    b.se_durrett = acc.band_d_durrett[i].se(n, exact);
    b.in_progress = acc.band_pending[i].mean(n);
    s.in_progress = std::max(s.in_progress, b.in_progress);
    s.bands.push_back(std::move(b));
  }
  for (std::size_t i = 0; i < p.alphas.size(); ++i) {
    AlternationStats a;
    a.alpha = p.alphas[i];
    for (const auto& m : acc.alt_ge[i]) {
      a.p_at_least_2k.push_back(m.mean(n));
      a.se_at_least_2k.push_back(m.se(n, exact));
    }
    a.mean_a = acc.alt_a[i].mean(n);
    a.se_a = acc.alt_a[i].se(n, exact);
    s.alternations.push_back(std::move(a));
  }
  for (std::size_t i = 0; i < p.emm_levels.size(); ++i) {
    EmmStats e;
    e.m = i + 1;
    e.f_m = p.emm_levels[i];
    e.prob = acc.emm_hold[i].mean(n);
    e.se = acc.emm_hold[i].se(n, exact);
    e.mean_u = acc.emm_u[i].mean(n);
    e.se_u = acc.emm_u[i].se(n, exact);
    s.emm.push_back(e);
  }
  double run = 0.0, run2 = 0.0;
  for (std::size_t t = 0; t <= p.horizon; ++t) {
    run += acc.tail[t];
    run2 += acc.tail2[t];
    Moments m{acc.trace[t] + run, acc.trace2[t] + run2};
    s.mean_value.push_back(m.mean(n));
    s.se_value.push_back(m.se(n, exact));
  }
  s.tallies = std::move(acc.tallies);
  build_reports(s, r, exact);
  return s;
}

inline void sample_path(const Resolved& r, const Plan& p, TrialStream& rng, Accum& acc, bool keep_tally,
                        std::uint64_t path_id) {
  MeasureCursor pc = r.measure.cursor();
  ProcessCursor xc = r.process.start();
  Scans scans = p.fresh();
  double x = value_or_throw(xc);
  scans.push(0, x);
  acc.observe(0, 1.0, x);
  std::size_t t = 0;
  while (t < p.horizon && !xc.absorbed()) {
    const auto cond = pc.conditionals();
    const Symbol a = rng.symbol(cond);
    xc.advance(cond, a);
    pc.advance(a);
    x = value_or_throw(xc);
    ++t;
    scans.push(t, x);
    acc.observe(t, 1.0, x);
  }
  acc.finish(p, 1.0, scans, t, x, keep_tally, path_id);
}

}  // namespace detail

/// Trials are processed in fixed blocks of this many paths, merged in block
/// order, so the summary does not depend on the number of workers.
inline constexpr std::uint64_t kTrialBlock = 2048;

inline RunSummary run_monte_carlo(const LabConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const Resolved r = resolve(cfg);
  const detail::Plan plan = detail::make_plan(cfg, r, false);
  const std::uint64_t blocks = (cfg.trials + kTrialBlock - 1) / kTrialBlock;
  std::vector<std::optional<detail::Accum>> parts(blocks);
  parallel_for(
      blocks,
      [&](std::size_t bi) {
        detail::Accum acc(plan);
        const std::uint64_t lo = bi * kTrialBlock;
        const std::uint64_t hi = std::min(cfg.trials, lo + kTrialBlock);
        for (std::uint64_t i = lo; i < hi; ++i) {
          TrialStream rng(cfg.seed, i);
          detail::sample_path(r, plan, rng, acc, cfg.tallies, i);
        }
        parts[bi].emplace(std::move(acc));
      },
      cfg.workers);
  detail::Accum total(plan);
  for (auto& part : parts) total.merge(std::move(*part));
  RunSummary s = detail::summarize(cfg, r, plan, total, false);
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

namespace detail {

struct ExactWalk {
  const Resolved& r;
  const Plan& p;
  Accum& acc;
  double max_defect = 0.0;
  double min_value = std::numeric_limits<double>::infinity();
  std::uint64_t leaf_id = 0;
  bool keep_tally = false;

  void visit(const MeasureCursor& pc, const ProcessCursor& xc, Scans scans, double prob, std::size_t t) {
    const double x = value_or_throw(xc);
    min_value = std::min(min_value, x);
    scans.push(t, x);
    acc.observe(t, prob, x);
    if (t == p.horizon || xc.absorbed()) {
      acc.finish(p, prob, scans, t, x, keep_tally, leaf_id++);
      return;
    }
    const auto cond = pc.conditionals();
    double expectation = 0.0;
    for (Symbol a = 0; a < cond.size(); ++a) {
      if (cond[a] <= kZeroProbability) continue;
      ProcessCursor cx = xc;
      cx.advance(cond, a);
      MeasureCursor cp = pc;
      cp.advance(a);
      expectation += cond[a] * value_or_throw(cx);
      visit(cp, cx, scans, prob * cond[a], t + 1);
    }
    max_defect = std::max(max_defect, std::abs(expectation - x));
  }
};

}  // namespace detail

/// Exhaustive weighted enumeration of all prefixes up to the horizon; absorbed
/// prefixes are not expanded further.
inline RunSummary run_exact(const LabConfig& cfg_in) {
  const auto start = std::chrono::steady_clock::now();
  LabConfig cfg = cfg_in;
  cfg.trials = std::max<std::uint64_t>(cfg.trials, 1);
  const Resolved r = resolve(cfg);
  checked_tree_size(r.measure.alphabet().size(), cfg.horizon);
  const detail::Plan plan = detail::make_plan(cfg, r, true);
  detail::Accum acc(plan);
  detail::ExactWalk walk{r, plan, acc};
  walk.keep_tally = cfg.tallies;
  walk.visit(r.measure.cursor(), r.process.start(), plan.fresh(), 1.0, 0);
  RunSummary s = detail::summarize(cfg, r, plan, acc, true);

  VerificationReport v;
  v.depth = cfg.horizon;
  v.max_martingale_defect = walk.max_defect;
  v.min_value = walk.min_value;
  for (double m : s.mean_value) v.max_expectation_defect = std::max(v.max_expectation_defect, std::abs(m - s.x0));
  v.pass = v.max_martingale_defect <= v.tolerance && v.max_expectation_defect <= v.tolerance &&
           v.min_value >= -v.tolerance;
  s.verification = v;
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

}  // namespace martosc::lab
