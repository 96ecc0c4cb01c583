#pragma once

// Lab configuration: an INI file (sections measure, process, run, bands,
// alternations, output) with command-line overrides applied on top.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "martosc/common.hpp"
#include "martosc/crossings.hpp"
#include "martosc/martingale.hpp"
#include "martosc/measure.hpp"
#include "martosc/oscillator.hpp"
#include "martosc/schedule.hpp"

namespace martosc::lab {

/// Configuration that cannot be resolved into measures/processes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabConfig {
  std::string measure = "bernoulli:0.5";
  /// oscillator | doob_tight | quotient | bounded_walk | doubling | constant
  std::string process = "oscillator";
  std::string schedule = "finite:0.2,3";
  double a = 1.0;        // doob_tight band
  double b = 2.0;
  std::string q;         // quotient numerator measure
  double value = 1.0;    // constant process
  std::uint64_t horizon = 1000;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::uint64_t k_cap = 8;
  /// Largest m for the E_{m,m} events; 0 derives it from the schedule.
  std::uint64_t emm_m = 0;
  std::vector<Band> bands;     // empty: derived from the process
  std::vector<double> alphas;  // empty: derived from the process
  std::string out_dir = "out";
  bool tallies = false;

  void validate() const {
    if (trials < 1) throw ConfigError("run.trials must be >= 1");
    if (horizon < 1) throw ConfigError("run.horizon must be >= 1");
    for (const auto& band : bands)
      if (!(band.eps > 0.0)) throw ConfigError("bands: eps must be positive");
    for (double alpha : alphas)
      if (!(alpha > 0.0)) throw ConfigError("alternations: alpha must be positive");
  }
};

namespace detail {

inline std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item.substr(first), &used));
      if (item.find_first_not_of(" \t", first + used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse number '" + item + "'");
    }
  }
  return out;
}

inline std::pair<std::string, std::vector<double>> split_spec(const std::string& spec, const std::string& what) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return {spec, {}};
  return {spec.substr(0, colon), parse_numbers(spec.substr(colon + 1), what)};
}

inline void expect_arity(const std::vector<double>& args, std::size_t n, const std::string& spec) {
  if (args.size() != n) throw ConfigError("'" + spec + "' expects " + std::to_string(n) + " parameter(s)");
}

}  // namespace detail

/// "bernoulli:p" or "iid:p0,p1,...".
inline PrefixMeasure parse_measure(const std::string& spec) {
  const auto [kind, args] = detail::split_spec(spec, "measure");
  try {
    if (kind == "bernoulli") {
      detail::expect_arity(args, 1, spec);
      return bernoulli_measure(args[0]);
    }
    if (kind == "iid") return iid_measure(args, spec);
  } catch (const DomainError& e) {
    throw ConfigError("measure '" + spec + "': " + e.what());
  }
  throw ConfigError("unknown measure kind '" + kind + "'");
}

/// "finite:delta,m" | "logsq:delta" | "band:a,b" | "invlog:a,b"; the long names
/// log_squared, constant_band and inverse_log are accepted too.
inline Schedule parse_schedule(const std::string& spec) {
  const auto [kind, args] = detail::split_spec(spec, "schedule");
  try {
    if (kind == "finite") {
      detail::expect_arity(args, 2, spec);
      if (args[1] < 1 || args[1] != static_cast<double>(static_cast<std::uint64_t>(args[1])))
        throw ConfigError("schedule '" + spec + "': m must be a positive integer");
      return schedule_finite(args[0], static_cast<std::uint64_t>(args[1]));
    }
    if (kind == "logsq" || kind == "log_squared") {
      detail::expect_arity(args, 1, spec);
      return schedule_log_squared(args[0]);
    }
    if (kind == "band" || kind == "constant_band") {
      detail::expect_arity(args, 2, spec);
      return schedule_constant_band(args[0], args[1]);
    }
    if (kind == "invlog" || kind == "inverse_log") {
      detail::expect_arity(args, 2, spec);
      return schedule_inverse_log(args[0], args[1]);
    }
  } catch (const DomainError& e) {
    throw ConfigError("schedule '" + spec + "': " + e.what());
  }
  throw ConfigError("unknown schedule kind '" + kind + "'");
}

/// "c:eps, c:eps, ...".
inline std::vector<Band> parse_bands(const std::string& text) {
  std::vector<Band> bands;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("bands: expected c:eps, got '" + item + "'");
    const auto c = detail::parse_numbers(item.substr(0, colon), "bands");
    const auto eps = detail::parse_numbers(item.substr(colon + 1), "bands");
    if (c.size() != 1 || eps.size() != 1) throw ConfigError("bands: expected c:eps, got '" + item + "'");
    bands.push_back({c[0], eps[0]});
  }
  return bands;
}

inline LabConfig load_config(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot read config '" + path + "': " + e.message());
  }
  LabConfig cfg;
  try {
    // get(key, default) would fall back to the default on malformed values.
    auto read = [&tree](const char* key, auto& out) {
      if (tree.get_optional<std::string>(key)) out = tree.get<std::decay_t<decltype(out)>>(key);
    };
    read("measure.spec", cfg.measure);
    read("process.kind", cfg.process);
    read("process.schedule", cfg.schedule);
    read("process.a", cfg.a);
    read("process.b", cfg.b);
    read("process.q", cfg.q);
    read("process.value", cfg.value);
    read("run.horizon", cfg.horizon);
    read("run.trials", cfg.trials);
    read("run.seed", cfg.seed);
    read("run.workers", cfg.workers);
    read("run.k_cap", cfg.k_cap);
    read("run.emm_m", cfg.emm_m);
    if (auto list = tree.get_optional<std::string>("bands.list")) cfg.bands = parse_bands(*list);
    if (auto list = tree.get_optional<std::string>("alternations.alpha"))
      cfg.alphas = detail::parse_numbers(*list, "alternations.alpha");
    read("output.dir", cfg.out_dir);
    read("output.tallies", cfg.tallies);
  } catch (const boost::property_tree::ptree_bad_data& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return cfg;
}

/// Measures, process and schedule a configuration refers to.
struct Resolved {
  PrefixMeasure measure;
  MartingaleProcess process;
  std::optional<Schedule> schedule;
  std::vector<Band> bands;
  std::vector<double> alphas;
  std::uint64_t emm_m = 0;
};

inline Resolved resolve(const LabConfig& cfg) {
  cfg.validate();
  PrefixMeasure P = parse_measure(cfg.measure);
  std::optional<Schedule> schedule;
  auto make_process = [&]() -> MartingaleProcess {
    try {
      if (cfg.process == "oscillator") {
        schedule = parse_schedule(cfg.schedule);
        return build_oscillator(P, *schedule);
      }
      if (cfg.process == "doob_tight") {
        schedule = schedule_constant_band(cfg.a, cfg.b);
        return doob_tight_process(cfg.a, cfg.b, P);
      }
      if (cfg.process == "quotient") {
        if (cfg.q.empty()) throw ConfigError("process.q is required for a quotient process");
        return quotient_martingale(parse_measure(cfg.q), P);
      }
      if (cfg.process == "bounded_walk") return bounded_walk_process();
      if (cfg.process == "doubling") return doubling_process();
      if (cfg.process == "constant") return constant_process(cfg.value);
    } catch (const DomainError& e) {
      throw ConfigError("process '" + cfg.process + "': " + e.what());
    } catch (const ContractError& e) {
      throw ConfigError(e.what());
    }
    throw ConfigError("unknown process kind '" + cfg.process + "'");
  };
  MartingaleProcess X = make_process();

  std::vector<Band> bands = cfg.bands;
  std::uint64_t emm_m = cfg.emm_m;
  const double x0 = X.initial_value();
  if (cfg.process == "oscillator") {
    if (emm_m == 0) emm_m = schedule->kind() == ScheduleKind::finite ? 0 : 5;
    if (emm_m == 0) {
      while ((*schedule)(emm_m + 1) > 0.0 && emm_m < 64) ++emm_m;
    }
  }
  if (bands.empty()) {
    if (cfg.process == "doob_tight") {
      bands.push_back(Band::from_edges(cfg.a, cfg.b));
    } else if (cfg.process == "oscillator") {
      // One band per distinct magnitude f(1), ..., f(emm_m).
      for (std::uint64_t k = 1; k <= std::max<std::uint64_t>(emm_m, 1); ++k) {
        const double fk = (*schedule)(k);
        if (fk <= 0.0) break;
        if (bands.empty() || bands.back().eps != fk) bands.push_back({1.0, fk});
      }
    } else if (x0 > 0.0) {
      bands.push_back({x0, 0.5 * x0});
    }
  }
  std::vector<double> alphas = cfg.alphas;
  if (alphas.empty()) {
    if (X.traits().unit_interval) {
      alphas.push_back(0.2);
    } else if (!bands.empty()) {
      alphas.push_back(2.0 * bands.front().eps);
    }
  }
  return {P, X, schedule, bands, alphas, emm_m};
}

}  // namespace martosc::lab
