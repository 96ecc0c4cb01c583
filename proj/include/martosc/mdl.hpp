#pragma once

// Minimum description length selection over a finite model class, and the
// experiment in which it never settles: P against the measure induced by an
// oscillator under P.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "martosc/common.hpp"
#include "martosc/measure.hpp"
#include "martosc/oscillator.hpp"
#include "martosc/parallel.hpp"
#include "martosc/rng.hpp"

namespace martosc {

/// Scores within this many bits count as tied; ties go to the lowest index.
inline constexpr double kMdlTieBits = 1e-9;

struct Model {
  PrefixMeasure measure;
  double complexity = 0.0;
};

class ModelClass {
 public:
  explicit ModelClass(std::vector<Model> models) : models_(std::move(models)) {
    require_domain(!models_.empty(), "ModelClass: need at least one model");
    double kraft = 0.0;
    for (const auto& m : models_) {
      require_domain(m.complexity >= 0.0, "ModelClass: complexities must be nonnegative");
      require_domain(m.measure.alphabet() == models_.front().measure.alphabet(),
                     "ModelClass: models must share an alphabet");
      kraft += std::exp2(-m.complexity);
    }
    require_domain(kraft <= 1.0 + 1e-12, "ModelClass: sum of 2^-K exceeds 1");
  }

  std::size_t size() const { return models_.size(); }
  const Model& operator[](std::size_t i) const { return models_[i]; }
  const std::vector<Model>& models() const { return models_; }

 private:
  std::vector<Model> models_;
};

struct MdlTrace {
  /// selections[t] is the model chosen after the first t symbols, t = 0..horizon.
  std::vector<std::size_t> selections;
  std::uint64_t flips = 0;
};

namespace detail {

/// Running code lengths K(Q) - log2 Q(u) for every model in the class.
class MdlScores {
 public:
  explicit MdlScores(const ModelClass& cls) {
    for (const auto& m : cls.models()) {
      cursors_.push_back(m.measure.cursor());
      scores_.push_back(m.complexity);
    }
  }

  void advance(Symbol a) {
    for (std::size_t i = 0; i < cursors_.size(); ++i) {
      if (std::isfinite(scores_[i])) {
        const double p = cursors_[i].conditional(a);
        scores_[i] = p > 0.0 ? scores_[i] - std::log2(p) : std::numeric_limits<double>::infinity();
      }
      cursors_[i].advance(a);
    }
  }

  std::size_t argmin() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores_.size(); ++i) {
      if (scores_[i] < scores_[best] - kMdlTieBits) best = i;
    }
    if (!std::isfinite(scores_[best])) throw DomainError("mdl_select: every model assigns probability 0");
    return best;
  }

 private:
  std::vector<MeasureCursor> cursors_;
  std::vector<double> scores_;
};

}  // namespace detail

/// argmin over the class of K(Q) - log2 Q(u).
inline std::size_t mdl_select(const ModelClass& cls, const Word& u) {
  detail::MdlScores scores(cls);
  for (Symbol a : u) scores.advance(a);
  return scores.argmin();
}

/// Selections on every prefix of `path` up to length `horizon`.
inline MdlTrace mdl_trace(const ModelClass& cls, const Word& path, std::size_t horizon) {
  require_domain(horizon <= path.size(), "mdl_trace: horizon exceeds path length");
  detail::MdlScores scores(cls);
  MdlTrace trace;
  trace.selections.reserve(horizon + 1);
  trace.selections.push_back(scores.argmin());
  for (std::size_t t = 0; t < horizon; ++t) {
    scores.advance(path[t]);
    trace.selections.push_back(scores.argmin());
    if (trace.selections[t + 1] != trace.selections[t]) ++trace.flips;
  }
  return trace;
}

struct MdlExperimentResult {
  std::vector<std::uint64_t> flips;  // per trial
  std::int64_t threshold = 0;        // 2m - 1
  double fraction = 0.0;             // trials with flips >= threshold
  double guarantee = 0.0;            // 1 - delta
  /// guarantee - fraction: what truncation and sampling cost against the
  /// untruncated guarantee (negative when the estimate exceeds it).
  double slack = 0.0;
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
};

namespace detail {

/// One sampled path under P, recording MDL selections for the class
/// {(P, 1), (Q, 1)} with Q induced by X. With equal complexities Q wins iff
/// log2 X_t > kMdlTieBits, so the selection is read off the oscillator value;
/// once the oscillator is absorbed the selection can no longer change.
inline std::uint64_t mdl_flips_on_path(const PrefixMeasure& P, const MartingaleProcess& X, std::uint64_t horizon,
                                       TrialStream& rng) {
  MeasureCursor pc = P.cursor();
  ProcessCursor xc = X.start();
  auto select = [](double x) -> std::size_t { return std::log2(x) > kMdlTieBits ? 1 : 0; };
  std::size_t current = select(*xc.value());
  std::uint64_t flips = 0;
  for (std::uint64_t t = 0; t < horizon && !xc.absorbed(); ++t) {
    const auto cond = pc.conditionals();
    const Symbol a = rng.symbol(cond);
    xc.advance(cond, a);
    pc.advance(a);
    const std::size_t next = select(*xc.value());
    if (next != current) ++flips;
    current = next;
  }
  return flips;
}

}  // namespace detail

/// Samples `trials` paths under P and counts MDL flips between P and the
/// measure induced by the oscillator with schedule_finite(delta, m).
inline MdlExperimentResult mdl_oscillation_experiment(const PrefixMeasure& P, double delta, std::uint64_t m,
                                                      std::uint64_t horizon, std::uint64_t trials,
                                                      std::uint64_t seed, unsigned workers = 0) {
  require_domain(trials >= 1, "mdl_oscillation_experiment: trials must be >= 1");
  MdlExperimentResult result;
  result.horizon = horizon;
  result.seed = seed;
  result.threshold = 2 * static_cast<std::int64_t>(m) - 1;
  result.guarantee = 1.0 - delta;
  result.flips.assign(trials, 0);
  if (m == 0) {
    require_domain(delta > 0.0 && delta < 0.5, "mdl_oscillation_experiment: delta must lie in (0, 1/2)");
    result.fraction = 1.0;
    result.slack = result.guarantee - result.fraction;
    return result;
  }
  const MartingaleProcess X = build_oscillator(P, schedule_finite(delta, m));
  parallel_for(
      trials,
      [&](std::size_t i) {
        TrialStream rng(seed, i);
        result.flips[i] = detail::mdl_flips_on_path(P, X, horizon, rng);
      },
      workers);
  std::uint64_t hits = 0;
  for (auto f : result.flips)
    if (static_cast<std::int64_t>(f) >= result.threshold) ++hits;
  result.fraction = static_cast<double>(hits) / static_cast<double>(trials);
  result.slack = result.guarantee - result.fraction;
  return result;
}

}  // namespace martosc
