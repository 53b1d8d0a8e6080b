#pragma once

#include "tsl/finvec.hpp"
#include "tsl/rational.hpp"
#include "tsl/schreier.hpp"
#include "tsl/thetaseq.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace tsl {

// Norm by value iteration over every integer interval [u,v] inside ran(x):
// each round takes, for every q up to the interval's q_max, the best family of
// arbitrary nonempty successive integer intervals whose minima lie in S_q
// (membership by exhaustive decomposition). Iterates until nothing changes.
// Exponential; support at most 8 points, range at most 12 integers.
inline Rational brute_force_norm(const ThetaSeq& space, const FinVec& x) {
  if (x.empty()) return Rational(0);
  if (x.size() > 8) throw BudgetExceeded("brute-force norm needs |supp| <= 8");
  const std::int64_t a = x.min_index(), b = x.max_index();
  const int len = static_cast<int>(b - a + 1);
  if (len > 12) throw BudgetExceeded("brute-force norm needs a range of at most 12 integers");

  std::vector<Rational> coef(len);
  for (auto& e : x.entries()) coef[e.first - a] = abs(e.second);

  auto idx = [len](int u, int v) { return u * len + v; };
  std::vector<Rational> sup(len * len), l1(len * len);
  std::vector<int> qlim(len * len, 0);
  for (int u = 0; u < len; ++u) {
    Rational s(0), m(0);
    for (int v = u; v < len; ++v) {
      s += coef[v];
      if (coef[v] > m) m = coef[v];
      sup[idx(u, v)] = m;
      l1[idx(u, v)] = s;
      int q = 1;
      while (space.has_term(q + 1) && space.term(q) * s > m) ++q;
      qlim[idx(u, v)] = q;
    }
  }

  std::map<std::pair<std::uint32_t, int>, bool> member_memo;
  auto member = [&](std::uint32_t mask, int q) {
    auto key = std::make_pair(mask, q);
    auto it = member_memo.find(key);
    if (it != member_memo.end()) return it->second;
    std::vector<std::int64_t> mins;
    for (int t = 0; t < len; ++t)
      if (mask & (1u << t)) mins.push_back(a + t);
    bool m = schreier::is_member_by_enumeration(mins, static_cast<unsigned>(q));
    member_memo.emplace(key, m);
    return m;
  };

  std::vector<Rational> val = sup;
  while (true) {
    std::vector<Rational> next = val;
    bool changed = false;
    for (int u = 0; u < len; ++u) {
      for (int v = u; v < len; ++v) {
        const int qmax = qlim[idx(u, v)];
        std::vector<Rational> best_q(qmax + 1, Rational(-1));
        // Every family of successive nonempty intervals within [u, v].
        std::function<void(int, std::uint32_t, const Rational&)> walk = [&](int from, std::uint32_t mask,
                                                                             const Rational& total) {
          if (mask != 0)
            for (int q = 1; q <= qmax; ++q)
              if (total > best_q[q] && member(mask, q)) best_q[q] = total;
          for (int s = from; s <= v; ++s)
            for (int e = s; e <= v; ++e) walk(e + 1, mask | (1u << s), total + val[idx(s, e)]);
        };
        walk(u, 0, Rational(0));
        Rational cand = sup[idx(u, v)];
        for (int q = 1; q <= qmax; ++q)
          if (sgn(best_q[q]) >= 0) cand = max(cand, Rational(space.term(q) * best_q[q]));
        if (cand > next[idx(u, v)]) {
          next[idx(u, v)] = cand;
          changed = true;
        }
      }
    }
    val = std::move(next);
    if (!changed) break;
  }
  return val[idx(0, len - 1)];
}

// Largest product theta_{k_1} ... theta_{k_m} over all compositions
// k_1 + ... + k_m = n, by listing them. Exponential in n.
inline Rational best_composition_by_enumeration(const ThetaSeq& space, std::size_t n) {
  if (n > 20) throw BudgetExceeded("composition enumeration limited to n <= 20");
  Rational best(0);
  std::function<void(std::size_t, const Rational&)> rec = [&](std::size_t left, const Rational& prod) {
    if (left == 0) {
      if (prod > best) best = prod;
      return;
    }
    for (std::size_t k = 1; k <= left; ++k) rec(left - k, Rational(prod * space.term(k)));
  };
  rec(n, Rational(1));
  return best;
}

}  // namespace tsl
