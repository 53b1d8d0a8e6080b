#pragma once

#include "tsl/corenorm.hpp"
#include "tsl/finvec.hpp"
#include "tsl/random.hpp"
#include "tsl/rational.hpp"
#include "tsl/schreier.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tsl {

using schreier::Interval;
using schreier::IntervalSeq;

// A block sequence x_1 < x_2 < ... generated on demand. The generator gets the
// 1-based index s and max ran(x_{s-1}) (0 for s = 1).
class BlockSequence {
 public:
  using Generator = std::function<FinVec(std::size_t s, std::int64_t prev_max)>;

  BlockSequence(std::string id, Generator gen) : st_(std::make_shared<State>()) {
    st_->id = std::move(id);
    st_->gen = std::move(gen);
  }

  static BlockSequence unit_vectors() {
    return BlockSequence("unit", [](std::size_t s, std::int64_t) { return FinVec::unit(static_cast<std::int64_t>(s)); });
  }

  // x_s = e_{n_s}.
  static BlockSequence unit_subsequence(const schreier::IndexSequence& n) {
    return BlockSequence("unit-subsequence:" + n.id(),
                         [n](std::size_t s, std::int64_t) { return FinVec::unit(n.at(static_cast<std::int64_t>(s))); });
  }

  // Finite explicit list; asking past its end is an error.
  static BlockSequence explicit_blocks(std::string id, std::vector<FinVec> blocks) {
    for (std::size_t s = 0; s < blocks.size(); ++s) {
      if (blocks[s].empty()) throw Error("explicit block " + std::to_string(s + 1) + " is zero");
      if (s && !blocks[s - 1].precedes(blocks[s])) throw Error("explicit blocks are not successive");
    }
    auto shared = std::make_shared<std::vector<FinVec>>(std::move(blocks));
    return BlockSequence(std::move(id), [shared](std::size_t s, std::int64_t) {
      if (s > shared->size()) throw InsufficientPrefix("explicit block sequence has " + std::to_string(shared->size()) + " blocks");
      return (*shared)[s - 1];
    });
  }

  // Seeded random blocks: after a gap of 0..max_gap, a run of 1..max_len
  // positions with random positive rational coefficients.
  static BlockSequence random_blocks(std::uint64_t seed, std::int64_t max_len, std::int64_t max_gap) {
    auto rng = std::make_shared<Rng>(seed);
    std::string id = "random(seed=" + std::to_string(seed) + ",len<=" + std::to_string(max_len) +
                     ",gap<=" + std::to_string(max_gap) + ")";
    return BlockSequence(id, [rng, max_len, max_gap](std::size_t, std::int64_t prev) {
      std::int64_t start = prev + 1 + rng->uniform(0, max_gap);
      std::int64_t len = rng->uniform(1, max_len);
      std::vector<FinVec::Entry> e;
      for (std::int64_t t = 0; t < len; ++t) e.emplace_back(start + t, rng->positive_rational(4, 3));
      return FinVec(std::move(e));
    });
  }

  // x_s / ||x_s||; the evaluator must outlive the returned sequence.
  BlockSequence normalized(const NormEvaluator& ev) const {
    BlockSequence self = *this;
    const NormEvaluator* evp = &ev;
    return BlockSequence(id() + "/normalized:" + ev.space().id(), [self, evp](std::size_t s, std::int64_t) {
      const FinVec& b = self.at(s);
      return b.scaled(Rational(1 / evp->norm(b)));
    });
  }

  const FinVec& at(std::size_t s) const {
    if (s == 0) throw Error("block sequences are 1-based");
    while (st_->cache.size() < s) {
      std::int64_t prev = st_->cache.empty() ? 0 : st_->cache.back().max_index();
      FinVec b = st_->gen(st_->cache.size() + 1, prev);
      if (b.empty()) throw Error("block generator produced a zero block");
      if (b.min_index() <= prev) throw Error("block generator produced overlapping blocks");
      st_->cache.push_back(std::move(b));
    }
    return st_->cache[s - 1];
  }

  const std::string& id() const { return st_->id; }

 private:
  struct State {
    std::string id;
    Generator gen;
    std::vector<FinVec> cache;
  };
  std::shared_ptr<State> st_;
};

// epsilon^j_i, clamped to be nonincreasing in i on every level.
class EpsSchedule {
 public:
  explicit EpsSchedule(Rational fallback = make_rational(1, 2)) : fallback_(std::move(fallback)) {
    check(fallback_);
  }

  static EpsSchedule constant(const Rational& e) { return EpsSchedule(e); }

  // Explicit values epsilon^j_1, epsilon^j_2, ... for level j; the last repeats.
  EpsSchedule& set_level(unsigned j, std::vector<Rational> values) {
    for (auto& v : values) check(v);
    if (values.empty()) throw Error("empty epsilon list");
    per_level_[j] = std::move(values);
    return *this;
  }

  Rational raw(unsigned j, std::size_t i) const {
    auto it = per_level_.find(j);
    if (it == per_level_.end()) return fallback_;
    const auto& v = it->second;
    return v[std::min(i, v.size()) - 1];
  }

  Rational at(unsigned j, std::size_t i) const {
    Rational m = raw(j, 1);
    auto it = per_level_.find(j);
    std::size_t upto = it == per_level_.end() ? 1 : std::min(i, it->second.size());
    for (std::size_t t = 2; t <= upto; ++t) m = min(m, raw(j, t));
    return m;
  }

  const Rational& fallback() const { return fallback_; }
  const std::map<unsigned, std::vector<Rational>>& levels() const { return per_level_; }

 private:
  static void check(const Rational& e) {
    if (!(sgn(e) > 0 && e < 1)) throw Error("epsilon values must lie in (0,1)");
  }
  Rational fallback_;
  std::map<unsigned, std::vector<Rational>> per_level_;
};

struct AvgNode {
  FinVec vec;
  std::size_t first_child = 0;  // I^j_i as 1-based indices into level j-1; 0 on level 0
  std::size_t last_child = 0;
  std::size_t base_index = 0;   // level 0: s with x^0_i = x_s
  std::size_t min_base = 0;     // least base index below this node
  std::int64_t max_coord = 0;   // N^j_i = max ran(x^j_i)
  Rational eps{0};              // epsilon^j_i (levels >= 1)

  std::size_t k() const { return first_child == 0 ? 0 : last_child - first_child + 1; }
  Interval ran() const { return {vec.min_index(), vec.max_index()}; }
};

struct NodeRef {
  unsigned level = 0;
  std::size_t index = 1;  // 1-based
  bool operator==(const NodeRef&) const = default;
  bool operator<(const NodeRef& o) const { return level != o.level ? level > o.level : index < o.index; }
};

class AvgTree {
 public:
  unsigned M = 0;
  std::int64_t N = 1;
  bool refined = false;
  std::string base_id;
  Rational theta1{0};
  std::vector<std::vector<AvgNode>> levels;  // levels[j][i-1] = x^j_i

  std::size_t count(unsigned j) const { return levels.at(j).size(); }
  const AvgNode& node(unsigned j, std::size_t i) const { return levels.at(j).at(i - 1); }
  const AvgNode& node(NodeRef r) const { return node(r.level, r.index); }
  const AvgNode& root() const { return levels.at(M).at(0); }

  // N^j_i with N^j_0 = N.
  std::int64_t max_coord(unsigned j, std::size_t i) const { return i == 0 ? N : node(j, i).max_coord; }

  // Immediate successors of (j, i).
  std::vector<NodeRef> children(unsigned j, std::size_t i) const {
    std::vector<NodeRef> out;
    if (j == 0) return out;
    const AvgNode& n = node(j, i);
    for (std::size_t s = n.first_child; s <= n.last_child; ++s) out.push_back({j - 1, s});
    return out;
  }

  // Root written as sum of a_s x_s: (base index, weight) pairs in order.
  std::vector<std::pair<std::size_t, Rational>> root_weights() const {
    std::vector<Rational> w(1, Rational(1));
    for (unsigned j = M; j > 0; --j) {
      std::vector<Rational> next(count(j - 1), Rational(0));
      for (std::size_t i = 1; i <= count(j); ++i) {
        const AvgNode& n = node(j, i);
        Rational share = w[i - 1] / static_cast<long>(n.k());
        for (std::size_t s = n.first_child; s <= n.last_child; ++s) next[s - 1] += share;
      }
      w = std::move(next);
    }
    std::vector<std::pair<std::size_t, Rational>> out;
    for (std::size_t i = 1; i <= count(0); ++i) out.emplace_back(node(0, i).base_index, w[i - 1]);
    return out;
  }
};

struct AverageBudget {
  std::size_t max_k = 20000;           // longest single average
  std::size_t max_base_index = 200000; // furthest base vector touched
  std::size_t max_support = 4000;      // support of the root
};

// Lower bound that k^j_i must strictly exceed.
inline Rational average_length_bound(std::int64_t prev_max, const Rational& eps, bool refine, const Rational& theta1) {
  if (refine) return Rational(6 * prev_max) * Rational(prev_max) / (theta1 * eps);
  return Rational(2 * prev_max) / eps;
}

// Builds an (M, eps, N) average of base by the iterated left-to-right
// procedure: level-j candidates are averages of the next k consecutive
// level-(j-1) candidates whose base indices are all >= k, with k minimal.
inline AvgTree construct_average(const BlockSequence& base, unsigned M, std::int64_t N, const EpsSchedule& eps,
                                 bool refine = false, const Rational& theta1 = Rational(0),
                                 const AverageBudget& budget = {}) {
  if (N < 1) throw Error("N must be >= 1");
  if (refine && !(sgn(theta1) > 0)) throw Error("refined construction needs theta_1 > 0");

  struct Cand {
    std::size_t first = 0, last = 0;  // children on the level below (1-based)
    std::size_t min_base = 0;
    std::int64_t max_coord = 0;
  };
  std::vector<std::vector<Cand>> cands(M + 1);
  std::vector<std::size_t> cursor(M + 1, 1);

  std::function<const Cand&(unsigned, std::size_t)> cand;
  std::function<void(unsigned)> grow = [&](unsigned j) {
    auto& list = cands[j];
    const std::size_t i = list.size() + 1;
    if (j == 0) {
      if (i > budget.max_base_index)
        throw BudgetExceeded("average needs base vectors beyond index " + std::to_string(budget.max_base_index));
      list.push_back({0, 0, i, base.at(i).max_index()});
      return;
    }
    const std::int64_t prev = i == 1 ? N : list.back().max_coord;
    const Rational bound = average_length_bound(prev, eps.at(j, i), refine, theta1);
    const Integer kz = floor(bound) + 1;
    if (kz > static_cast<long>(budget.max_k))
      throw BudgetExceeded("average at level " + std::to_string(j) + " needs length " + kz.get_str() +
                           " (budget " + std::to_string(budget.max_k) + ")");
    const std::size_t k = kz.get_ui();
    std::size_t c = cursor[j - 1];
    if (j == 1) {
      c = std::max(c, k);
    } else {
      while (cand(j - 1, c).min_base < k) ++c;
    }
    if (j == 1 && c + k - 1 > budget.max_base_index)
      throw BudgetExceeded("average needs base vectors up to index " + std::to_string(c + k - 1) + " (budget " +
                           std::to_string(budget.max_base_index) + ")");
    const Cand& last = cand(j - 1, c + k - 1);
    Cand made{c, c + k - 1, cand(j - 1, c).min_base, last.max_coord};
    cursor[j - 1] = c + k;
    list.push_back(made);
  };
  cand = [&](unsigned j, std::size_t i) -> const Cand& {
    while (cands[j].size() < i) grow(j);
    return cands[j][i - 1];
  };

  cand(M, 1);

  // Collect the nodes under the root, level by level, and renumber.
  AvgTree t;
  t.M = M;
  t.N = N;
  t.refined = refine;
  t.theta1 = theta1;
  t.base_id = base.id();
  t.levels.assign(M + 1, {});
  std::vector<std::vector<std::size_t>> chosen(M + 1);
  chosen[M] = {1};
  for (unsigned j = M; j > 0; --j)
    for (std::size_t ci : chosen[j]) {
      const Cand& c = cands[j][ci - 1];
      for (std::size_t s = c.first; s <= c.last; ++s) chosen[j - 1].push_back(s);
    }
  std::size_t support = 0;
  for (std::size_t s : chosen[0]) support += base.at(s).size();
  if (support > budget.max_support)
    throw BudgetExceeded("average support " + std::to_string(support) + " exceeds budget " +
                         std::to_string(budget.max_support));

  for (unsigned j = 0; j <= M; ++j) {
    std::map<std::size_t, std::size_t> renumber;  // candidate index on level j-1 -> tree index
    if (j > 0)
      for (std::size_t t_i = 0; t_i < chosen[j - 1].size(); ++t_i) renumber[chosen[j - 1][t_i]] = t_i + 1;
    for (std::size_t t_i = 0; t_i < chosen[j].size(); ++t_i) {
      const std::size_t ci = chosen[j][t_i];
      AvgNode n;
      if (j == 0) {
        n.base_index = ci;
        n.min_base = ci;
        n.vec = base.at(ci);
      } else {
        const Cand& c = cands[j][ci - 1];
        n.first_child = renumber.at(c.first);
        n.last_child = renumber.at(c.last);
        n.min_base = t.levels[j - 1][n.first_child - 1].min_base;
        FinVec sum;
        for (std::size_t s = n.first_child; s <= n.last_child; ++s) sum = sum + t.levels[j - 1][s - 1].vec;
        n.vec = sum.scaled(Rational(1, static_cast<unsigned long>(n.k())));
        n.eps = eps.at(j, t_i + 1);
      }
      n.max_coord = n.vec.max_index();
      t.levels[j].push_back(std::move(n));
    }
  }
  return t;
}

// Each E_l minus the ranges of the blocks it splits; empty results dropped.
inline IntervalSeq minimal_shrink(const IntervalSeq& e, const std::vector<Interval>& blocks) {
  if (!schreier::is_valid_interval_seq(e)) throw Error("intervals are not successive");
  IntervalSeq out;
  for (const Interval& iv : e) {
    std::int64_t lo = iv.lo, hi = iv.hi;
    for (const Interval& b : blocks) {
      bool meets = b.hi >= iv.lo && b.lo <= iv.hi;
      bool inside = b.lo >= iv.lo && b.hi <= iv.hi;
      if (!meets || inside) continue;
      // b sticks out of E on at least one side; remove its part.
      if (b.lo <= lo && b.hi >= lo) lo = b.hi + 1;
      if (b.hi >= hi && b.lo <= hi) hi = b.lo - 1;
    }
    if (lo <= hi) out.push_back({lo, hi});
  }
  return out;
}

// True when interval f splits the block range b.
inline bool splits(const Interval& f, const Interval& b) {
  bool meets = b.hi >= f.lo && b.lo <= f.hi;
  bool inside = b.lo >= f.lo && b.hi <= f.hi;
  return meets && !inside;
}

enum class SubtreeKind { full, strict };

// T(x,k) (full) or T*(x,k) (strict); with f, the T_F(x,k) selection
// {x} together with the nodes of T*(x,k) whose range lies in f.
inline std::vector<NodeRef> subtree(const AvgTree& t, NodeRef x, unsigned k, SubtreeKind kind = SubtreeKind::full,
                                    std::optional<Interval> f = std::nullopt) {
  if (k == 0) throw Error("subtree depth must be >= 1");
  if (f) {
    for (auto c : t.children(x.level, x.index))
      if (splits(*f, t.node(c).ran())) throw PreconditionViolation("F splits an immediate successor");
  }
  const unsigned lowest = x.level + 1 >= k ? x.level + 1 - k : 0;
  std::vector<NodeRef> out;
  if (kind == SubtreeKind::full || f) out.push_back(x);
  std::vector<NodeRef> frontier{x};
  for (unsigned lvl = x.level; lvl > lowest; --lvl) {
    std::vector<NodeRef> next;
    for (auto r : frontier)
      for (auto c : t.children(r.level, r.index)) next.push_back(c);
    for (auto c : next) {
      if (f) {
        Interval rc = t.node(c).ran();
        if (!(rc.lo >= f->lo && rc.hi <= f->hi)) continue;
      }
      out.push_back(c);
    }
    frontier = std::move(next);
  }
  return out;
}

struct NodeLoss {
  NodeRef node;
  Rational worst_loss{0};  // largest sampled sum over l of ||(E(l) \ F(l)) x||
  Rational eps{0};
};

struct AverageReport {
  bool weights_ok = false;     // (1)
  bool admissible_ok = false;  // (2)
  bool shrink_ok = false;      // (3)
  Rational weight_sum{0};
  Rational eps_total{0};
  Rational loss_total{0};  // sum over nodes of the worst sampled loss
  std::size_t systems_sampled = 0;
  std::vector<NodeLoss> nodes;
  std::vector<std::string> failures;
  bool ok() const { return weights_ok && admissible_ok && shrink_ok; }
};

// Checks the three listed properties of a constructed average. Property (3)
// is checked on seeded interval systems: for each node, systems of
// min(N^j_{i-1}, room) intervals inside ran(x^j_i), half of them placed to
// straddle boundaries between consecutive children.
inline AverageReport verify_average_properties(const AvgTree& t, const NormEvaluator& ev, std::uint64_t seed = 1,
                                             std::size_t samples_per_node = 6) {
  AverageReport rep;
  // (1) convex combination of base vectors reproducing the root.
  auto weights = t.root_weights();
  rep.weights_ok = true;
  Rational sum(0);
  std::vector<std::size_t> base_set;
  for (auto& [s, w] : weights) {
    if (sgn(w) <= 0) rep.weights_ok = false;
    sum += w;
    base_set.push_back(s);
  }
  rep.weight_sum = sum;
  if (sum != 1) rep.weights_ok = false;
  {
    FinVec rebuilt;
    for (std::size_t i = 1; i <= t.count(0); ++i) rebuilt = rebuilt + t.node(0, i).vec.scaled(weights[i - 1].second);
    if (!(rebuilt == t.root().vec)) {
      rep.weights_ok = false;
      rep.failures.push_back("root differs from the weighted sum of base vectors");
    }
  }
  if (!rep.weights_ok) rep.failures.push_back("weights are not a positive convex combination");
  // (2) the base indices used form a set of S_M.
  schreier::IndexSet f(base_set.begin(), base_set.end());
  rep.admissible_ok = schreier::is_member(f, schreier::OrdinalIndex::finite(t.M));
  if (!rep.admissible_ok) rep.failures.push_back("root support is not in S_M with respect to the base");

  // (3) shrink losses.
  Rng rng(seed);
  rep.shrink_ok = true;
  for (unsigned j = 1; j <= t.M; ++j) {
    for (std::size_t i = 1; i <= t.count(j); ++i) {
      const AvgNode& n = t.node(j, i);
      rep.eps_total += n.eps;
      NodeLoss nl{{j, i}, Rational(0), n.eps};
      std::vector<Interval> blocks;
      for (auto c : t.children(j, i)) blocks.push_back(t.node(c).ran());
      const std::int64_t lo = n.vec.min_index(), hi = n.vec.max_index();
      const std::int64_t want = t.max_coord(j, i - 1);
      for (std::size_t smp = 0; smp < samples_per_node; ++smp) {
        IntervalSeq e;
        if (smp % 2 == 0 && blocks.size() >= 2) {
          // straddle every other boundary, at most `want` intervals
          std::size_t first = static_cast<std::size_t>(rng.uniform(0, 1));
          for (std::size_t b = first; b + 1 < blocks.size() && static_cast<std::int64_t>(e.size()) < want; b += 2) {
            std::int64_t a = rng.uniform(blocks[b].lo, blocks[b].hi);
            std::int64_t z = rng.uniform(blocks[b + 1].lo, blocks[b + 1].hi);
            e.push_back({a, z});
          }
        } else {
          const std::int64_t room = hi - lo + 1;
          const std::int64_t cnt = std::min<std::int64_t>(want, std::max<std::int64_t>(1, room / 2));
          std::vector<std::int64_t> cuts;
          for (std::int64_t c = 0; c < 2 * cnt; ++c) cuts.push_back(rng.uniform(lo, hi));
          std::sort(cuts.begin(), cuts.end());
          for (std::int64_t c = 0; c + 1 < 2 * cnt; c += 2) {
            Interval iv{cuts[c], cuts[c + 1]};
            if (!e.empty() && iv.lo <= e.back().hi) iv.lo = e.back().hi + 1;
            if (iv.lo <= iv.hi) e.push_back(iv);
          }
        }
        if (e.empty()) continue;
        ++rep.systems_sampled;
        IntervalSeq shrunk = minimal_shrink(e, blocks);
        Rational loss(0);
        for (const Interval& iv : e) {
          std::vector<FinVec::Entry> part;
          const FinVec piece = n.vec.restrict(iv.lo, iv.hi);
          for (auto& [idx, c] : piece.entries()) {
            bool kept = false;
            for (const Interval& s : shrunk) kept = kept || s.contains(idx);
            if (!kept) part.emplace_back(idx, c);
          }
          loss += ev.norm(FinVec(std::move(part)));
        }
        if (loss > nl.worst_loss) nl.worst_loss = loss;
      }
      if (!(nl.worst_loss < nl.eps)) {
        rep.shrink_ok = false;
        rep.failures.push_back("shrink loss at node (" + std::to_string(j) + "," + std::to_string(i) + ") is " +
                               to_string(nl.worst_loss) + ", not below " + to_string(nl.eps));
      }
      rep.loss_total += nl.worst_loss;
      rep.nodes.push_back(nl);
    }
  }
  if (t.M > 0 && !(rep.loss_total < rep.eps_total)) {
    rep.shrink_ok = false;
    rep.failures.push_back("total shrink loss is not below the sum of epsilons");
  }
  return rep;
}

}  // namespace tsl
