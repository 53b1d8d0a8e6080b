#pragma once

// Independent reference implementations used only by the tests.

#include "tsl/rational.hpp"

#include <cstdint>
#include <vector>

namespace oracle {

// Bottom-up membership tables for S_0..S_max_level restricted to subsets of
// {1..n}, built straight from the recursive definition: S_0 is the empty set
// and singletons; a nonempty set is in S_{r+1} when its sorted elements split
// into at most min(F) consecutive runs, each in S_r.
class SchreierTable {
 public:
  SchreierTable(int n, int max_level) : n_(n), table_(max_level + 1, std::vector<char>(std::size_t{1} << n, 0)) {
    const std::uint32_t full = 1u << n;
    for (std::uint32_t m = 0; m < full; ++m) table_[0][m] = __builtin_popcount(m) <= 1;
    for (int r = 1; r <= max_level; ++r) {
      for (std::uint32_t m = 0; m < full; ++m) {
        if (m == 0) {
          table_[r][m] = 1;
          continue;
        }
        std::vector<int> el;
        for (int b = 0; b < n; ++b)
          if (m & (1u << b)) el.push_back(b + 1);
        // fewest[t]: fewest S_{r-1} runs covering el[0..t-1].
        const int k = static_cast<int>(el.size());
        std::vector<int> fewest(k + 1, 1 << 20);
        fewest[0] = 0;
        for (int t = 1; t <= k; ++t)
          for (int s = 0; s < t; ++s) {
            std::uint32_t run = 0;
            for (int u = s; u < t; ++u) run |= 1u << (el[u] - 1);
            if (table_[r - 1][run] && fewest[s] + 1 < fewest[t]) fewest[t] = fewest[s] + 1;
          }
        table_[r][m] = fewest[k] <= el[0];
      }
    }
  }

  bool contains(int level, std::uint32_t mask) const { return table_[level][mask]; }
  int n() const { return n_; }

 private:
  int n_;
  std::vector<std::vector<char>> table_;
};

inline std::vector<std::int64_t> mask_to_set(std::uint32_t mask) {
  std::vector<std::int64_t> out;
  for (int b = 0; b < 32; ++b)
    if (mask & (1u << b)) out.push_back(b + 1);
  return out;
}

// sup over compositions k_1 + ... + k_m = n of prod theta_{k_i}; theta[0] unused.
inline tsl::Rational best_composition(const std::vector<tsl::Rational>& theta, int n) {
  tsl::Rational best(0);
  std::vector<int> parts;
  auto rec = [&](auto&& self, int left, tsl::Rational prod) -> void {
    if (left == 0) {
      if (prod > best) best = prod;
      return;
    }
    for (int k = 1; k <= left; ++k) self(self, left - k, tsl::Rational(prod * theta[k]));
  };
  rec(rec, n, tsl::Rational(1));
  return best;
}

}  // namespace oracle
