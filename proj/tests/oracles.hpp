#pragma once

// Reference implementations used only by tests. They are deliberately naive.

#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

/// Upcrossings as the supremum over all candidate stopping sequences
/// 0 < s_1 < t_1 < s_2 < t_2 < ... with X_s <= lo and X_t >= hi: every
/// alternating subsequence is enumerated and the longest one wins.
inline int brute_force_upcrossings(const std::vector<double>& x, double lo, double hi) {
  int best = 0;
  std::function<void(std::size_t, bool, int)> dfs = [&](std::size_t from, bool want_low, int pairs) {
    if (pairs > best) best = pairs;
    for (std::size_t j = from; j < x.size(); ++j) {
      if (want_low ? x[j] <= lo : x[j] >= hi) dfs(j + 1, !want_low, want_low ? pairs : pairs + 1);
    }
  };
  dfs(1, true, 0);
  return best;
}

/// Reflected walk on the levels {0, 0.5, 1, 1.5, 2} started at 1; bit i of
/// `bits` set means step up.
inline std::vector<double> grid_path(std::uint32_t bits, int steps) {
  std::vector<double> v{1.0};
  int level = 2;
  for (int i = 0; i < steps; ++i) {
    level += (bits >> i & 1u) ? 1 : -1;
    if (level < 0) level = 0;
    if (level > 4) level = 4;
    v.push_back(0.5 * level);
  }
  return v;
}

}  // namespace oracle
