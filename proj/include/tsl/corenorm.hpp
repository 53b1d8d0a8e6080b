#pragma once

#include "tsl/finvec.hpp"
#include "tsl/rational.hpp"
#include "tsl/schreier.hpp"
#include "tsl/thetaseq.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tsl {

namespace detail {

// Upper-triangular table indexed by (i, j), i <= j < n.
template <class T>
class Tri {
 public:
  Tri() = default;
  explicit Tri(std::size_t n) : n_(n), data_(n * (n + 1) / 2) {}
  T& operator()(std::size_t i, std::size_t j) { return data_[j * (j + 1) / 2 + i]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[j * (j + 1) / 2 + i]; }
  std::size_t n() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

// Every value stored in the family tables is a sum of norms, hence >= 0;
// -1 marks "no family of this shape exists".
inline const Rational& absent() {
  static const Rational v(-1);
  return v;
}

// For a leaf functional L on support ranges, the tables hold, per level r,
//   B_r(i,j):  best sum of L over families whose first piece starts at i,
//              whose starts lie in S_r, and whose pieces tile [i..j];
//   G_r(i,j):  the same restricted to families of at least two pieces;
//   P_r(i,j,u): best tiling of [i..j] by at most u pieces valued B_{r-1};
//   C_r(i,j):  max over i' >= i of B_r(i',j), the S_r-admissible sup in [i..j].
// A family in S_r splits into at most min(starts) blocks in S_{r-1}; pieces
// are extended to the next start without changing values because L is
// monotone under restriction.
class FamilyTables {
 public:
  FamilyTables() = default;
  FamilyTables(const std::vector<std::int64_t>* pos, const Tri<Rational>* leaf)
      : pos_(pos), leaf_(leaf), n_(pos->size()) {}

  std::size_t levels() const { return levels_.size(); }

  void add_level() { levels_.emplace_back(n_); }

  std::size_t ucap(std::size_t i, std::size_t j) const {
    std::int64_t cnt = static_cast<std::int64_t>(j - i + 1);
    return static_cast<std::size_t>(std::min((*pos_)[i], cnt));
  }

  const Rational& B(std::size_t r, std::size_t i, std::size_t j) const {
    return r == 0 ? (*leaf_)(i, j) : levels_[r - 1].b(i, j);
  }
  const Rational& G(std::size_t r, std::size_t i, std::size_t j) const {
    return r == 0 ? absent() : levels_[r - 1].g(i, j);
  }
  const Rational& C(std::size_t r, std::size_t i, std::size_t j) const {
    if (r == 0) throw Error("C_0 is not tabulated");
    return levels_[r - 1].c(i, j);
  }
  // Best tiling of [i..j] into at most u pieces, u clamped to the stored range.
  const Rational& P(std::size_t r, std::size_t i, std::size_t j, std::size_t u) const {
    const auto& v = levels_[r - 1].p(i, j);
    return v[std::min(u, v.size()) - 1];
  }
  std::size_t p_size(std::size_t r, std::size_t i, std::size_t j) const { return levels_[r - 1].p(i, j).size(); }

  // Part of entry (i,j) at level r that needs only shorter ranges and level r-1.
  void partial(std::size_t r, std::size_t i, std::size_t j) {
    Level& lv = levels_[r - 1];
    const std::size_t cap = ucap(i, j);
    Rational g = G(r - 1, i, j);
    std::vector<Rational>& mu = lv.p(i, j);
    mu.assign(cap, absent());
    if (cap >= 2) {
      for (std::size_t d = i + 1; d <= j; ++d) {
        const Rational& left = B(r - 1, i, d - 1);
        const auto& pd = lv.p(d, j);
        for (std::size_t u = 2; u <= cap; ++u) {
          const Rational& right = pd[std::min(u - 1, pd.size()) - 1];
          Rational val = left + right;
          if (val > mu[u - 1]) mu[u - 1] = std::move(val);
        }
      }
      if (mu[cap - 1] > g) g = mu[cap - 1];
    }
    lv.g(i, j) = std::move(g);
  }

  // Remainder of entry (i,j) at level r once the leaf value L(i,j) is known.
  void finalize(std::size_t r, std::size_t i, std::size_t j) {
    Level& lv = levels_[r - 1];
    const Rational& leaf = (*leaf_)(i, j);
    lv.b(i, j) = max(leaf, lv.g(i, j));
    const Rational& single = B(r - 1, i, j);
    auto& pv = lv.p(i, j);
    pv[0] = single;
    for (std::size_t u = 1; u < pv.size(); ++u)
      if (pv[u] < single) pv[u] = single;
    lv.c(i, j) = lv.b(i, j);
    if (i < j && lv.c(i + 1, j) > lv.c(i, j)) lv.c(i, j) = lv.c(i + 1, j);
  }

  // Builds level levels()+1 for every entry; the leaf must be complete.
  void build_next_level() {
    add_level();
    const std::size_t r = levels_.size();
    for (std::size_t len = 1; len <= n_; ++len)
      for (std::size_t i = 0; i + len <= n_; ++i) {
        std::size_t j = i + len - 1;
        partial(r, i, j);
        finalize(r, i, j);
      }
  }

 private:
  struct Level {
    explicit Level(std::size_t n) : b_(n), g_(n), c_(n), p_(n) {}
    Rational& b(std::size_t i, std::size_t j) { return b_(i, j); }
    const Rational& b(std::size_t i, std::size_t j) const { return b_(i, j); }
    Rational& g(std::size_t i, std::size_t j) { return g_(i, j); }
    const Rational& g(std::size_t i, std::size_t j) const { return g_(i, j); }
    Rational& c(std::size_t i, std::size_t j) { return c_(i, j); }
    const Rational& c(std::size_t i, std::size_t j) const { return c_(i, j); }
    std::vector<Rational>& p(std::size_t i, std::size_t j) { return p_(i, j); }
    const std::vector<Rational>& p(std::size_t i, std::size_t j) const { return p_(i, j); }
    Tri<Rational> b_, g_, c_;
    Tri<std::vector<Rational>> p_;
  };

  const std::vector<std::int64_t>* pos_ = nullptr;
  const Tri<Rational>* leaf_ = nullptr;
  std::size_t n_ = 0;
  std::vector<Level> levels_;
};

}  // namespace detail

// Optimal nested family realizing a norm value. A node with q == 0 is
// evaluated by the sup norm; otherwise value = theta_q * sum of children.
struct Witness {
  schreier::Interval range;
  unsigned q = 0;
  Rational value;
  std::vector<Witness> children;
};

// Exact tables for one vector; only |x| matters. Range arguments lo, hi are
// 0-based indices into the support. Thread-safe.
class NormAnalysis {
 public:
  NormAnalysis(const ThetaSeq& space, const FinVec& x) : space_(space) {
    for (auto& e : x.entries()) {
      pos_.push_back(e.first);
      val_.push_back(abs(e.second));
    }
    n_ = pos_.size();
    build();
  }

  const std::vector<std::int64_t>& positions() const { return pos_; }
  std::size_t size() const { return n_; }
  const ThetaSeq& space() const { return space_; }

  // Support-index range of x restricted to [a, b], if nonempty.
  std::optional<std::pair<std::size_t, std::size_t>> range_of(std::int64_t a, std::int64_t b) const {
    auto lo = std::lower_bound(pos_.begin(), pos_.end(), a);
    auto hi = std::upper_bound(pos_.begin(), pos_.end(), b);
    if (lo >= hi) return std::nullopt;
    return std::make_pair(static_cast<std::size_t>(lo - pos_.begin()), static_cast<std::size_t>(hi - pos_.begin() - 1));
  }

  Rational norm() const { return n_ == 0 ? Rational(0) : norm_range(0, n_ - 1); }

  Rational norm_range(std::size_t lo, std::size_t hi) const { return value_(lo, hi); }

  Rational norm_interval(std::int64_t a, std::int64_t b) const {
    auto r = range_of(a, b);
    return r ? norm_range(r->first, r->second) : Rational(0);
  }

  // sup over S_r-admissible families in [lo..hi] of sum ||E_i x||; r = 0 gives ||x||.
  Rational admissible_sum(std::size_t lo, std::size_t hi, std::size_t r) const {
    if (r == 0) return norm_range(lo, hi);
    std::lock_guard<std::mutex> g(mu_);
    std::size_t eff = ensure_level(r);
    return tables_.C(eff, lo, hi);
  }

  // ||x||_p = theta_p * sup over p-admissible families of sum ||E_i x||.
  Rational norm_p(std::size_t lo, std::size_t hi, std::size_t p) const {
    if (p == 0) return norm_range(lo, hi);
    return space_.term(p) * admissible_sum(lo, hi, p);
  }

  // ||x||_{N,p}: at most N successive intervals, all starting at or after N.
  Rational norm_Np(std::size_t lo, std::size_t hi, std::int64_t big_n, std::size_t p) const {
    if (big_n < 1) throw Error("||.||_{N,p} needs N >= 1");
    std::lock_guard<std::mutex> g(mu_);
    const detail::Tri<Rational>& leaf = leaf_for(p);
    const std::size_t len = hi - lo + 1;
    const std::size_t parts = static_cast<std::size_t>(std::min<std::int64_t>(big_n, static_cast<std::int64_t>(len)));
    // best[c][u]: best tiling of [c..hi] into at most u pieces starting at c.
    std::vector<std::vector<Rational>> best(len + 1);
    Rational answer(0);
    for (std::size_t cc = len; cc-- > 0;) {
      std::size_t c = lo + cc;
      auto& row = best[cc];
      row.assign(parts, leaf(c, hi));
      for (std::size_t d = c + 1; d <= hi; ++d) {
        const auto& next = best[d - lo];
        for (std::size_t u = 2; u <= parts; ++u) {
          Rational v = leaf(c, d - 1) + next[u - 2];
          if (v > row[u - 1]) row[u - 1] = std::move(v);
        }
      }
      if (pos_[c] >= big_n && row[parts - 1] > answer) answer = row[parts - 1];
    }
    return answer;
  }

  // ||x||_{S_N,p}: sup over S_N-admissible families of sum ||E_i x||_p.
  Rational norm_SNp(std::size_t lo, std::size_t hi, std::size_t big_n, std::size_t p) const {
    std::lock_guard<std::mutex> g(mu_);
    const detail::Tri<Rational>& leaf = leaf_for(p);
    if (big_n == 0) {
      Rational best(0);
      for (std::size_t c = lo; c <= hi; ++c)
        if (leaf(c, hi) > best) best = leaf(c, hi);
      return best;
    }
    if (p == 0) return tables_.C(ensure_level(big_n), lo, hi);
    detail::FamilyTables& ft = p_tables(p);
    std::size_t eff = std::min(big_n, sat_level_);
    while (ft.levels() < eff) ft.build_next_level();
    return ft.C(eff, lo, hi);
  }

  Witness witness(std::size_t lo, std::size_t hi) const {
    std::lock_guard<std::mutex> g(mu_);
    return witness_node(lo, hi);
  }
  Witness witness() const {
    if (n_ == 0) return Witness{};
    return witness(0, n_ - 1);
  }

  // Largest Schreier index needed while evaluating the norm.
  std::size_t levels_used() const { return levels_for_norm_; }

 private:
  const Rational& value_(std::size_t i, std::size_t j) const { return v_(i, j); }

  static constexpr std::size_t kNever = static_cast<std::size_t>(-1);

  // Least r with the positions in [i..j] forming a set of S_r, or kNever.
  static std::size_t saturation(const std::vector<std::int64_t>& pos, std::size_t i, std::size_t j, std::size_t from) {
    // A set with minimum 1 and two or more elements lies in no S_r.
    if (from == kNever || (pos[i] == 1 && j > i)) return kNever;
    std::span<const std::int64_t> s(pos.data() + i, j - i + 1);
    std::size_t r = from;
    while (!schreier::is_member(s, schreier::OrdinalIndex::finite(static_cast<unsigned>(r)))) ++r;
    return r;
  }

  // Least q with theta_q * l1 <= sup (capped by the table length).
  std::size_t q_cutoff(const Rational& l1, const Rational& sup) const {
    std::size_t q = 1;
    while (true) {
      if (!space_.has_term(q + 1)) return q;
      if (space_.term(q) * l1 <= sup) return q;
      ++q;
    }
  }

  void build() {
    v_ = detail::Tri<Rational>(n_);
    tables_ = detail::FamilyTables(&pos_, &v_);
    if (n_ == 0) return;
    // A start at position 1 only ever carries a single-piece family, so the
    // level past which nothing changes is set by the positions >= 2.
    const std::size_t first = pos_[0] == 1 ? 1 : 0;
    sat_level_ = first < n_ ? std::max<std::size_t>(1, saturation(pos_, first, n_ - 1, 0)) : 1;
    // Per-range q bound: q_max from the sup/l1 ratio, and no gain past the
    // level at which every family in the range is admissible.
    detail::Tri<std::size_t> qe(n_);
    std::size_t rmax = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      Rational sup(0), l1(0);
      std::size_t sat = 0;
      for (std::size_t j = i; j < n_; ++j) {
        if (val_[j] > sup) sup = val_[j];
        l1 += val_[j];
        sat = saturation(pos_, i, j, sat);
        std::size_t q = j == i ? 0 : std::min(q_cutoff(l1, sup), std::max<std::size_t>(sat, 1));
        qe(i, j) = q;
        rmax = std::max(rmax, q);
      }
    }
    levels_for_norm_ = rmax;
    for (std::size_t r = 0; r < rmax; ++r) tables_.add_level();
    for (std::size_t len = 1; len <= n_; ++len) {
      for (std::size_t i = 0; i + len <= n_; ++i) {
        const std::size_t j = i + len - 1;
        for (std::size_t r = 1; r <= rmax; ++r) tables_.partial(r, i, j);
        Rational best(0);
        for (std::size_t t = i; t <= j; ++t)
          if (val_[t] > best) best = val_[t];
        for (std::size_t q = 1; q <= qe(i, j); ++q) {
          Rational cand = tables_.G(q, i, j);
          if (i < j && tables_.C(q, i + 1, j) > cand) cand = tables_.C(q, i + 1, j);
          if (sgn(cand) < 0) continue;
          Rational v = space_.term(q) * cand;
          if (v > best) best = std::move(v);
        }
        v_(i, j) = std::move(best);
        for (std::size_t r = 1; r <= rmax; ++r) tables_.finalize(r, i, j);
      }
    }
  }

  // Levels beyond saturation repeat the saturated one.
  std::size_t ensure_level(std::size_t r) const {
    std::size_t eff = std::min(r, sat_level_);
    while (tables_.levels() < eff) tables_.build_next_level();
    return eff;
  }

  const detail::Tri<Rational>& leaf_for(std::size_t p) const {
    if (p == 0) return v_;
    auto it = p_leaf_.find(p);
    if (it != p_leaf_.end()) return *it->second;
    std::size_t eff = ensure_level(p);
    const Rational tp = space_.term(p);
    auto leaf = std::make_unique<detail::Tri<Rational>>(n_);
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t i = 0; i <= j; ++i) (*leaf)(i, j) = tp * tables_.C(eff, i, j);
    auto& ref = *leaf;
    p_leaf_.emplace(p, std::move(leaf));
    return ref;
  }

  detail::FamilyTables& p_tables(std::size_t p) const {
    auto it = p_family_.find(p);
    if (it != p_family_.end()) return *it->second;
    const auto& leaf = leaf_for(p);
    auto ft = std::make_unique<detail::FamilyTables>(&pos_, &leaf);
    auto& ref = *ft;
    p_family_.emplace(p, std::move(ft));
    return ref;
  }

  using Pieces = std::vector<std::pair<std::size_t, std::size_t>>;

  // Pieces of an optimal family for B_r(c, j).
  void pieces_B(std::size_t r, std::size_t c, std::size_t j, Pieces& out) const {
    if (r == 0 || tables_.B(r, c, j) == v_(c, j)) {
      out.emplace_back(c, j);
      return;
    }
    pieces_G(r, c, j, out);
  }

  void pieces_G(std::size_t r, std::size_t c, std::size_t j, Pieces& out) const {
    const Rational& target = tables_.G(r, c, j);
    if (r >= 2 && tables_.G(r - 1, c, j) == target) {
      pieces_G(r - 1, c, j, out);
      return;
    }
    const std::size_t cap = tables_.ucap(c, j);
    pieces_tiling(r, c, j, cap, target, out, /*at_least_two=*/true);
  }

  // Tiling of [c..j] by at most u blocks valued B_{r-1} and summing to target.
  void pieces_tiling(std::size_t r, std::size_t c, std::size_t j, std::size_t u, const Rational& target, Pieces& out,
                     bool at_least_two) const {
    if (u == 0) throw Error("witness reconstruction failed");
    if (!at_least_two && tables_.B(r - 1, c, j) == target) {
      pieces_B(r - 1, c, j, out);
      return;
    }
    if (u == 1) throw Error("witness reconstruction failed");
    for (std::size_t d = c + 1; d <= j; ++d) {
      const Rational& right = tables_.P(r, d, j, u - 1);
      if (tables_.B(r - 1, c, d - 1) + right == target) {
        pieces_B(r - 1, c, d - 1, out);
        pieces_tiling(r, d, j, std::min(u - 1, tables_.p_size(r, d, j)), right, out, false);
        return;
      }
    }
    throw Error("witness reconstruction failed");
  }

  Witness witness_node(std::size_t i, std::size_t j) const {
    Witness w;
    w.range = {pos_[i], pos_[j]};
    w.value = v_(i, j);
    Rational sup(0);
    for (std::size_t t = i; t <= j; ++t)
      if (val_[t] > sup) sup = val_[t];
    if (v_(i, j) == sup) return w;
    for (std::size_t q = 1; q <= levels_for_norm_; ++q) {
      const Rational tq = space_.term(q);
      Pieces pieces;
      if (sgn(tables_.G(q, i, j)) >= 0 && tq * tables_.G(q, i, j) == v_(i, j)) {
        pieces_G(q, i, j, pieces);
      } else if (i < j && tq * tables_.C(q, i + 1, j) == v_(i, j)) {
        std::size_t c = i + 1;
        while (tables_.B(q, c, j) != tables_.C(q, i + 1, j)) ++c;
        pieces_B(q, c, j, pieces);
      } else {
        continue;
      }
      w.q = static_cast<unsigned>(q);
      for (auto& [a, b] : pieces) w.children.push_back(witness_node(a, b));
      return w;
    }
    throw Error("witness reconstruction failed");
  }

  ThetaSeq space_;
  std::vector<std::int64_t> pos_;
  std::vector<Rational> val_;
  std::size_t n_ = 0;
  std::size_t sat_level_ = 1;
  std::size_t levels_for_norm_ = 0;
  detail::Tri<Rational> v_;
  mutable detail::FamilyTables tables_;
  mutable std::map<std::size_t, std::unique_ptr<detail::Tri<Rational>>> p_leaf_;
  mutable std::map<std::size_t, std::unique_ptr<detail::FamilyTables>> p_family_;
  mutable std::mutex mu_;
};

// Recomputes the value encoded by a witness directly from x, checking that
// every family is successive, lies in its parent, and is admissible.
inline Rational evaluate_witness(const ThetaSeq& space, const FinVec& x, const Witness& w) {
  if (w.q == 0) {
    if (!w.children.empty()) throw Error("sup-norm witness node has children");
    return x.restrict(w.range.lo, w.range.hi).sup_norm();
  }
  schreier::IntervalSeq fam;
  for (auto& c : w.children) {
    if (c.range.lo < w.range.lo || c.range.hi > w.range.hi) throw Error("witness piece leaves its parent");
    fam.push_back(c.range);
  }
  if (fam.empty()) throw Error("witness family is empty");
  if (!schreier::is_admissible(fam, schreier::OrdinalIndex::finite(w.q))) throw Error("witness family not admissible");
  if (fam.size() == 1 && x.restrict(fam[0].lo, fam[0].hi) == x.restrict(w.range.lo, w.range.hi))
    throw Error("witness family is the trivial single interval");
  Rational s(0);
  for (auto& c : w.children) s += evaluate_witness(space, x, c);
  return space.term(w.q) * s;
}

// Memoizing evaluator for one space. Results never depend on cache state;
// the cache is keyed by positions and absolute coefficients.
class NormEvaluator {
 public:
  explicit NormEvaluator(ThetaSeq space) : space_(std::move(space)) {
    if (!space_.regular()) throw PreconditionViolation("norm evaluation needs a regular theta sequence");
  }

  const ThetaSeq& space() const { return space_; }

  std::shared_ptr<const NormAnalysis> analyze(const FinVec& x) const {
    FinVec key_vec = x.abs_values();
    std::string key = key_vec.to_string();
    {
      std::lock_guard<std::mutex> g(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) {
        ++hits_;
        return it->second;
      }
    }
    auto a = std::make_shared<const NormAnalysis>(space_, key_vec);
    std::lock_guard<std::mutex> g(mu_);
    if (cache_.size() >= max_cached_) cache_.clear();
    cache_.emplace(key, a);
    values_.emplace(key, a->norm());
    return a;
  }

  Rational norm(const FinVec& x) const {
    if (x.empty()) return Rational(0);
    std::string key = x.abs_values().to_string();
    {
      std::lock_guard<std::mutex> g(mu_);
      auto it = values_.find(key);
      if (it != values_.end()) {
        ++hits_;
        return it->second;
      }
    }
    return analyze(x)->norm();
  }

  Rational norm_p(const FinVec& x, std::size_t p) const {
    if (x.empty()) return Rational(0);
    return analyze(x)->norm_p(0, x.size() - 1, p);
  }

  Rational norm_Np(const FinVec& x, std::int64_t big_n, std::size_t p) const {
    if (x.empty()) return Rational(0);
    return analyze(x)->norm_Np(0, x.size() - 1, big_n, p);
  }

  Rational norm_SNp(const FinVec& x, std::size_t big_n, std::size_t p) const {
    if (x.empty()) return Rational(0);
    return analyze(x)->norm_SNp(0, x.size() - 1, big_n, p);
  }

  Witness witness(const FinVec& x) const {
    if (x.empty()) return Witness{};
    return analyze(x)->witness();
  }

  // Least q with theta_q * ||x||_1 <= ||x||_inf.
  std::size_t q_max(const FinVec& x) const {
    std::size_t q = 1;
    while (space_.has_term(q + 1) && space_.term(q) * x.l1_norm() > x.sup_norm()) ++q;
    return q;
  }

  std::size_t cache_hits() const {
    std::lock_guard<std::mutex> g(mu_);
    return hits_;
  }

  // Norm values by canonical key, for persistence under this space's id.
  std::map<std::string, Rational> exported_values() const {
    std::lock_guard<std::mutex> g(mu_);
    return {values_.begin(), values_.end()};
  }
  void import_values(const std::map<std::string, Rational>& vals) {
    std::lock_guard<std::mutex> g(mu_);
    for (auto& [k, v] : vals) values_.emplace(k, v);
  }

 private:
  ThetaSeq space_;
  std::size_t max_cached_ = 20000;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::shared_ptr<const NormAnalysis>> cache_;
  mutable std::unordered_map<std::string, Rational> values_;
  mutable std::size_t hits_ = 0;
};

}  // namespace tsl
