#pragma once

// Report emission. Numbers are written with 17 significant digits and keys
// in a fixed order, so identical summaries produce identical bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "martosc/bounds.hpp"
#include "martosc/lab/engine.hpp"
#include "martosc/mdl.hpp"

namespace martosc::lab {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kBandsHeader = "band_lo,band_hi,k,empirical,theoretical,std_err,verdict";
inline constexpr const char* kBoundsHeader = "name,kind,theoretical,empirical,std_err,n,verdict";
inline constexpr const char* kTalliesHeader = "path_id,band_lo,band_hi,upcrossings,alternations";

/// One row per (band, k) with the Dubins bound as the theoretical value.
inline std::string bands_csv(const RunSummary& s) {
  std::ostringstream out;
  out << kBandsHeader << '\n';
  for (const auto& b : s.bands) {
    if (!(b.band.lo() > 0.0)) continue;
    for (std::size_t k = 1; k <= b.p_at_least.size(); ++k) {
      const double theo = dubins_bound(b.band.c, b.band.eps, k, s.x0);
      const Verdict v = judge(BoundKind::upper, theo, b.p_at_least[k - 1], b.se_at_least[k - 1]);
      out << fmt(b.band.lo()) << ',' << fmt(b.band.hi()) << ',' << k << ',' << fmt(b.p_at_least[k - 1]) << ','
          << fmt(theo) << ',' << fmt(b.se_at_least[k - 1]) << ',' << to_string(v) << '\n';
    }
  }
  return out.str();
}

inline std::string bounds_csv(const std::vector<BoundReport>& reports) {
  std::ostringstream out;
  out << kBoundsHeader << '\n';
  for (const auto& r : reports) {
    out << '"' << r.name << "\"," << (r.kind == BoundKind::upper ? "upper" : "lower") << ',' << fmt(r.theoretical)
        << ',' << fmt(r.empirical) << ',' << fmt(r.std_err) << ',' << r.n << ',' << to_string(r.verdict) << '\n';
  }
  return out.str();
}

inline std::string tallies_csv(const std::vector<PathTally>& tallies) {
  std::ostringstream out;
  out << kTalliesHeader << '\n';
  for (const auto& t : tallies) {
    out << t.path_id << ',' << fmt(t.band.lo()) << ',' << fmt(t.band.hi()) << ',' << t.upcrossings << ','
        << t.alternations << '\n';
  }
  return out.str();
}

inline std::string value_trace_csv(const RunSummary& s) {
  std::ostringstream out;
  out << "t,mean,std_err\n";
  for (std::size_t t = 0; t < s.mean_value.size(); ++t)
    out << t << ',' << fmt(s.mean_value[t]) << ',' << fmt(s.se_value[t]) << '\n';
  return out.str();
}

inline nlohmann::ordered_json to_json(const VerificationReport& v) {
  nlohmann::ordered_json j;
  j["depth"] = v.depth;
  j["max_defect"] = v.max_martingale_defect;
  j["expectation_defect"] = v.max_expectation_defect;
  j["min_value"] = v.min_value;
  j["tolerance"] = v.tolerance;
  j["verdict"] = v.pass ? "pass" : "fail";
  return j;
}

inline nlohmann::ordered_json to_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["kind"] = r.kind == BoundKind::upper ? "upper" : "lower";
  j["theoretical"] = r.theoretical;
  j["empirical"] = r.empirical;
  j["std_err"] = r.std_err;
  j["n"] = r.n;
  j["verdict"] = to_string(r.verdict);
  return j;
}

inline nlohmann::ordered_json to_json(const RunSummary& s) {
  nlohmann::ordered_json j;
  j["mode"] = s.mode;
  j["measure"] = s.measure;
  j["process"] = s.process;
  j["schedule"] = s.schedule;
  j["horizon"] = s.horizon;
  j["trials"] = s.trials;
  j["seed"] = s.seed;
  j["x0"] = s.x0;
  j["in_progress_fraction"] = s.in_progress;
  j["all_hold"] = s.all_hold();
  auto& bands = j["bands"] = nlohmann::ordered_json::array();
  for (const auto& b : s.bands) {
    nlohmann::ordered_json e;
    e["band_lo"] = b.band.lo();
    e["band_hi"] = b.band.hi();
    e["p_at_least"] = b.p_at_least;
    e["mean_upcrossings"] = b.mean_u;
    e["std_err_upcrossings"] = b.se_u;
    e["mean_alternations_2eps"] = b.mean_alternations;
    e["mean_shortfall"] = b.mean_shortfall;
    e["mean_excess"] = b.mean_excess;
    e["mean_excess_direct"] = b.mean_excess_direct;
    e["in_progress"] = b.in_progress;
    bands.push_back(std::move(e));
  }
  auto& alts = j["alternations"] = nlohmann::ordered_json::array();
  for (const auto& a : s.alternations) {
    nlohmann::ordered_json e;
    e["alpha"] = a.alpha;
    e["p_at_least_2k"] = a.p_at_least_2k;
    e["mean"] = a.mean_a;
    e["std_err"] = a.se_a;
    alts.push_back(std::move(e));
  }
  auto& emm = j["emm"] = nlohmann::ordered_json::array();
  for (const auto& e : s.emm) {
    nlohmann::ordered_json x;
    x["m"] = e.m;
    x["f_m"] = e.f_m;
    x["prob"] = e.prob;
    x["std_err"] = e.se;
    x["mean_upcrossings"] = e.mean_u;
    emm.push_back(std::move(x));
  }
  if (!s.mean_value.empty()) j["final_mean_value"] = s.mean_value.back();
  if (s.verification) j["verification"] = to_json(*s.verification);
  auto& reports = j["bound_reports"] = nlohmann::ordered_json::array();
  for (const auto& r : s.reports) reports.push_back(to_json(r));
  return j;
}

inline nlohmann::ordered_json to_json(const MdlExperimentResult& r) {
  nlohmann::ordered_json j;
  j["trials"] = r.flips.size();
  j["horizon"] = r.horizon;
  j["seed"] = r.seed;
  j["threshold"] = r.threshold;
  j["fraction"] = r.fraction;
  j["guarantee"] = r.guarantee;
  j["slack"] = r.slack;
  return j;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ReportError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw ReportError("write to '" + path.string() + "' failed");
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create directory '" + dir.string() + "': " + ec.message());
}

/// Writes bands.csv, bounds.csv, value_trace.csv, summary.json and, when the
/// summary carries per-path tallies, tallies.csv.
inline std::vector<std::filesystem::path> emit_reports(const RunSummary& s, const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::vector<std::filesystem::path> written = {dir / "bands.csv", dir / "bounds.csv", dir / "value_trace.csv",
                                                dir / "summary.json"};
  write_file(written[0], bands_csv(s));
  write_file(written[1], bounds_csv(s.reports));
  write_file(written[2], value_trace_csv(s));
  write_file(written[3], to_json(s).dump(2) + "\n");
  if (!s.tallies.empty()) {
    written.push_back(dir / "tallies.csv");
    write_file(written.back(), tallies_csv(s.tallies));
  }
  return written;
}

inline std::vector<std::filesystem::path> emit_mdl_report(const MdlExperimentResult& r,
                                                          const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::ostringstream flips;
  flips << "trial,flips\n";
  for (std::size_t i = 0; i < r.flips.size(); ++i) flips << i << ',' << r.flips[i] << '\n';
  std::vector<std::filesystem::path> written = {dir / "mdl_flips.csv", dir / "mdl_summary.json"};
  write_file(written[0], flips.str());
  write_file(written[1], to_json(r).dump(2) + "\n");
  return written;
}

/// Aligned text table of bound reports.
inline std::string format_bound_table(const std::vector<BoundReport>& reports) {
  std::size_t width = 4;
  for (const auto& r : reports) width = std::max(width, r.name.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %14s  %14s  %12s  %s\n", static_cast<int>(width), "name", "theoretical",
                "empirical", "std_err", "verdict");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-*s  %14.8g  %14.8g  %12.4g  %s\n", static_cast<int>(width), r.name.c_str(),
                  r.theoretical, r.empirical, r.std_err, to_string(r.verdict));
    out << line;
  }
  return out.str();
}

}  // namespace martosc::lab
