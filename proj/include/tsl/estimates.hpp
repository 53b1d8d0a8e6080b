#pragma once

#include "tsl/averages.hpp"
#include "tsl/corenorm.hpp"
#include "tsl/random.hpp"
#include "tsl/rational.hpp"
#include "tsl/schreier.hpp"
#include "tsl/thetaseq.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace tsl {

// A* = A minus one copy of max A. Sets here are multisets of values indexed
// by blocks, so equal values from different blocks are all kept.
inline std::vector<Rational> star(std::vector<Rational> a) {
  if (a.empty()) throw Error("star of an empty set");
  a.erase(std::max_element(a.begin(), a.end()));
  return a;
}

// max of A*, or 0 when A has at most one element.
inline Rational second_largest(const std::vector<Rational>& a) {
  if (a.size() < 2) return Rational(0);
  Rational top(a[0]), next(-1);
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (a[i] > top) {
      next = top;
      top = a[i];
    } else if (a[i] > next) {
      next = a[i];
    }
  }
  return next;
}

struct StarAverageCheck {
  Rational lhs;  // (1/k) sum of all elements
  Rational rhs;  // max of the union of the starred sets, plus eps
  bool hypotheses = false;
  bool holds = false;
};

// For sets A_1..A_N in [0, D] with total size <= k and k >= N D / eps:
// (1/k) sum sum A_l <= max(union A_l*) + eps.
inline StarAverageCheck star_average_check(const std::vector<std::vector<Rational>>& sets, const Rational& d,
                                           const Rational& eps, std::size_t k) {
  StarAverageCheck c;
  std::size_t total = 0;
  bool in_range = true;
  Rational sum(0), best(0);
  for (auto& a : sets) {
    total += a.size();
    for (auto& v : a) {
      in_range = in_range && sgn(v) >= 0 && v <= d;
      sum += v;
    }
    if (!a.empty())
      for (auto& v : star(a)) best = max(best, v);
  }
  c.hypotheses = in_range && total <= k && k > 0 &&
                 Rational(static_cast<long>(k)) >= Rational(static_cast<long>(sets.size())) * d / eps;
  c.lhs = k ? Rational(sum / static_cast<long>(k)) : Rational(0);
  c.rhs = best + eps;
  c.holds = c.lhs <= c.rhs;
  return c;
}

enum class CheckStatus { holds, fails, inconclusive, vacuous };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::holds: return "holds";
    case CheckStatus::fails: return "fails";
    case CheckStatus::inconclusive: return "inconclusive";
    case CheckStatus::vacuous: return "vacuous";
  }
  return "?";
}

// One inequality instance lhs <= rhs.
struct InequalityCheck {
  std::string name;
  std::string params;
  Rational lhs{0};
  Rational rhs{0};
  CheckStatus status = CheckStatus::vacuous;
  bool certified = false;  // the hypotheses of the statement are known to hold

  Rational slack() const { return rhs - lhs; }
  bool holds() const { return status == CheckStatus::holds || status == CheckStatus::vacuous; }
};

struct EstimateReport {
  std::string which;
  std::vector<InequalityCheck> rows;

  std::size_t count(CheckStatus s) const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [s](auto& r) { return r.status == s; }));
  }
  bool ok() const { return count(CheckStatus::fails) == 0; }
  Rational min_slack() const {
    std::optional<Rational> m;
    for (auto& r : rows)
      if (r.status != CheckStatus::vacuous && (!m || r.slack() < *m)) m = r.slack();
    return m.value_or(Rational(0));
  }
};

namespace detail {

inline std::string interval_str(const Interval& f) {
  return "[" + std::to_string(f.lo) + "," + std::to_string(f.hi) + "]";
}

inline void settle(InequalityCheck& c) { c.status = c.lhs <= c.rhs ? CheckStatus::holds : CheckStatus::fails; }

// ||F y||_{N,p} for an interval F of coordinates.
inline Rational restricted_Np(const NormEvaluator& ev, const FinVec& y, const Interval& f, std::int64_t big_n,
                              std::size_t p) {
  auto a = ev.analyze(y);
  auto r = a->range_of(f.lo, f.hi);
  if (!r) return Rational(0);
  return a->norm_Np(r->first, r->second, big_n, p);
}

}  // namespace detail

struct LongAverageReport {
  InequalityCheck part1;
  InequalityCheck part2;
  std::size_t part2_p = 0;  // p used by the best witness for part (2)
};

// Both parts of the long-average estimate for x = (1/k)(x_1 + ... + x_k).
// Part (2) is witnessed by the single interval ran(x) with a common p;
// p is scanned over [1, 1 + p_extra].
inline LongAverageReport check_longaverage(const NormEvaluator& ev, const std::vector<FinVec>& blocks,
                                           std::optional<Interval> f, std::int64_t big_n, std::size_t p,
                                           const Rational& eps, std::size_t p_extra = 8) {
  const ThetaSeq& th = ev.space();
  const std::size_t k = blocks.size();
  if (k == 0) throw PreconditionViolation("no blocks");
  if (p == 0) throw PreconditionViolation("part (1) needs p >= 1");
  if (!(sgn(eps) > 0 && eps < 1)) throw PreconditionViolation("eps must lie in (0,1)");
  for (std::size_t i = 0; i < k; ++i) {
    if (blocks[i].empty()) throw PreconditionViolation("blocks must be nonzero");
    if (i && !blocks[i - 1].precedes(blocks[i])) throw PreconditionViolation("blocks must be successive");
    if (ev.norm(blocks[i]) > 1) throw PreconditionViolation("blocks must have norm at most 1");
  }
  if (blocks[0].min_index() < static_cast<std::int64_t>(k)) throw PreconditionViolation("need k <= x_1");
  if (!(Rational(static_cast<long>(k)) > Rational(6 * big_n) / (th.term(1) * eps)))
    throw PreconditionViolation("need k > 6N/(theta_1 eps)");

  FinVec x;
  for (auto& b : blocks) x = x + b;
  x = x.scaled(Rational(1, static_cast<unsigned long>(k)));
  const Interval ran{x.min_index(), x.max_index()};

  // N_i = max ran(x_i), N_0 = 1.
  auto prev_max = [&](std::size_t i) -> std::int64_t { return i == 0 ? 1 : blocks[i - 1].max_index(); };

  LongAverageReport rep;
  rep.part1.name = "longaverage(1)";
  rep.part1.certified = true;
  Interval fi = f.value_or(ran);
  rep.part1.params = "F=" + detail::interval_str(fi) + ",N=" + std::to_string(big_n) + ",p=" + std::to_string(p);
  if (fi.hi < ran.lo || fi.lo > ran.hi) {
    rep.part1.lhs = 0;
    rep.part1.rhs = eps;
    rep.part1.status = CheckStatus::vacuous;
  } else {
    fi = {std::max(fi.lo, ran.lo), std::min(fi.hi, ran.hi)};
    for (auto& b : blocks)
      if (splits(fi, {b.min_index(), b.max_index()})) throw PreconditionViolation("F splits a block");
    rep.part1.lhs = detail::restricted_Np(ev, x, fi, big_n, p);
    Rational best(0);
    for (std::size_t i = 0; i < k; ++i)
      if (blocks[i].min_index() >= fi.lo && blocks[i].max_index() <= fi.hi)
        best = max(best, ev.norm_Np(blocks[i], prev_max(i), p - 1));
    rep.part1.rhs = th.term(p) / th.term(p - 1) * best + eps;
    detail::settle(rep.part1);
  }

  rep.part2.name = "longaverage(2)";
  rep.part2.certified = true;
  rep.part2.lhs = ev.norm_Np(x, big_n, 0);
  Rational best_rhs(-1);
  for (std::size_t pp = 1; pp <= 1 + p_extra && th.has_term(pp); ++pp) {
    std::vector<Rational> vals;
    for (std::size_t i = 0; i < k; ++i)
      vals.push_back(th.term(pp) / th.term(pp - 1) * ev.norm_Np(blocks[i], prev_max(i), pp - 1));
    Rational r = second_largest(vals) + eps;
    if (r > best_rhs) {
      best_rhs = r;
      rep.part2_p = pp;
    }
  }
  rep.part2.rhs = best_rhs;
  rep.part2.params = "F_1=" + detail::interval_str(ran) + ",p_1=" + std::to_string(rep.part2_p);
  rep.part2.status = rep.part2.lhs <= rep.part2.rhs ? CheckStatus::holds : CheckStatus::inconclusive;
  return rep;
}

enum class TreeEstimate { restricted_seminorm, shifted_seminorm, node_norm, root_norm };

inline const char* to_string(TreeEstimate w) {
  switch (w) {
    case TreeEstimate::restricted_seminorm: return "restricted-seminorm";
    case TreeEstimate::shifted_seminorm: return "shifted-seminorm";
    case TreeEstimate::node_norm: return "node-norm";
    case TreeEstimate::root_norm: return "root-norm";
  }
  return "?";
}

inline TreeEstimate parse_tree_estimate(const std::string& s) {
  for (auto w : {TreeEstimate::restricted_seminorm, TreeEstimate::shifted_seminorm, TreeEstimate::node_norm,
                 TreeEstimate::root_norm})
    if (s == to_string(w)) return w;
  throw Error("unknown estimate '" + s + "'");
}

struct TreeEstimateRequest {
  TreeEstimate which = TreeEstimate::restricted_seminorm;
  std::size_t p = 0;        // 0: enumerate
  std::optional<std::size_t> p_prime;  // shifted form only; unset: enumerate
  std::optional<Interval> f;           // unset: enumerate
  std::size_t p_extra = 8;             // norm forms scan p in [J, J + p_extra]
  std::size_t exhaustive_children = 16;  // nodes with more children get a reduced F family
};

// Evaluates one of the tree inequalities at every applicable node.
//
// restricted-seminorm: ||F x^j_i||_{N^j_{i-1},p} <= theta_p max ||x^{j-p}_s||_{.,0}
//                      + sum eps/N over T_F(x^j_i,p), 1 <= p <= j.
// shifted-seminorm:    the (p, p') form with theta_p / theta_p' and level j-(p-p').
// node-norm:           ||x^J_i||_{N^J_{i-1},0} <= max(values*) + sum of eps over T(x^J_i, J), every J >= 1.
// root-norm:           node-norm at the root with ||x|| on the left.
//
// F ranges over intervals spanned by runs of consecutive children; for nodes
// with more than exhaustive_children children only runs that are a single
// child, a prefix, a suffix or everything are used. The norm forms use the single
// interval ran(x) with a common p; when no p in range works the row is
// inconclusive rather than failed.
inline EstimateReport check_tree_estimates(const NormEvaluator& ev, const AvgTree& t, const TreeEstimateRequest& req) {
  const ThetaSeq& th = ev.space();
  if (t.refined && t.theta1 != th.term(1))
    throw Error("tree was built for theta_1 = " + to_string(t.theta1) + ", space has " + to_string(th.term(1)));
  EstimateReport rep;
  rep.which = to_string(req.which);
  if (t.M == 0) {
    InequalityCheck c;
    c.name = rep.which;
    c.params = "M=0";
    c.status = CheckStatus::vacuous;
    rep.rows.push_back(c);
    return rep;
  }

  bool normalized = true;
  for (std::size_t s = 1; s <= t.count(0) && normalized; ++s) normalized = ev.norm(t.node(0, s).vec) == 1;
  const bool certified = t.refined && normalized;

  std::map<std::tuple<unsigned, std::size_t, std::size_t>, Rational> aux_cache;
  auto aux = [&](NodeRef r, std::size_t pp) -> Rational {
    auto key = std::make_tuple(r.level, r.index, pp);
    auto it = aux_cache.find(key);
    if (it != aux_cache.end()) return it->second;
    Rational v = ev.norm_Np(t.node(r).vec, t.max_coord(r.level, r.index - 1), pp);
    aux_cache.emplace(key, v);
    return v;
  };
  auto inside = [&](NodeRef r, const Interval& f) {
    Interval rr = t.node(r).ran();
    return rr.lo >= f.lo && rr.hi <= f.hi;
  };
  auto descendants_at = [&](NodeRef x, unsigned level) {
    std::vector<NodeRef> cur{x};
    for (unsigned l = x.level; l > level; --l) {
      std::vector<NodeRef> next;
      for (auto r : cur)
        for (auto c : t.children(r.level, r.index)) next.push_back(c);
      cur = std::move(next);
    }
    return cur;
  };
  auto f_family = [&](NodeRef x) {
    std::vector<Interval> fs;
    if (req.f) {
      Interval rx = t.node(x).ran();
      Interval f{std::max(req.f->lo, rx.lo), std::min(req.f->hi, rx.hi)};
      if (f.lo <= f.hi) fs.push_back(f);
      return fs;
    }
    auto ch = t.children(x.level, x.index);
    const std::size_t k = ch.size();
    auto span = [&](std::size_t a, std::size_t b) { return Interval{t.node(ch[a]).ran().lo, t.node(ch[b]).ran().hi}; };
    if (k <= req.exhaustive_children) {
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a; b < k; ++b) fs.push_back(span(a, b));
    } else {
      for (std::size_t a = 0; a < k; ++a) {
        fs.push_back(span(a, a));
        if (a > 0) fs.push_back(span(0, a));
        if (a + 1 < k && a > 0) fs.push_back(span(a, k - 1));
      }
    }
    return fs;
  };
  auto eps_over_n = [&](const std::vector<NodeRef>& nodes) {
    Rational s(0);
    for (auto r : nodes)
      if (r.level > 0) s += t.node(r).eps / Rational(t.max_coord(r.level, r.index - 1));
    return s;
  };
  auto eps_sum = [&](const std::vector<NodeRef>& nodes) {
    Rational s(0);
    for (auto r : nodes)
      if (r.level > 0) s += t.node(r).eps;
    return s;
  };

  // shifted-seminorm instance at node x with (p, p'); restricted-seminorm is p' = 0.
  auto shift_row = [&](NodeRef x, const Interval& f, std::size_t pp, std::size_t pq) {
    const unsigned d = static_cast<unsigned>(pp - pq);
    InequalityCheck c;
    c.name = rep.which;
    c.certified = certified;
    c.params = "node=(" + std::to_string(x.level) + "," + std::to_string(x.index) + "),F=" + detail::interval_str(f) +
               ",p=" + std::to_string(pp) + ",p'=" + std::to_string(pq);
    const AvgNode& n = t.node(x);
    c.lhs = detail::restricted_Np(ev, n.vec, f, t.max_coord(x.level, x.index - 1), pp);
    Rational best(0);
    for (auto r : descendants_at(x, x.level - d))
      if (inside(r, f)) best = max(best, aux(r, pq));
    c.rhs = th.term(pp) / th.term(pq) * best + eps_over_n(subtree(t, x, d, SubtreeKind::strict, f));
    detail::settle(c);
    return c;
  };

  switch (req.which) {
    case TreeEstimate::restricted_seminorm:
    case TreeEstimate::shifted_seminorm: {
      for (unsigned j = 1; j <= t.M; ++j)
        for (std::size_t i = 1; i <= t.count(j); ++i) {
          NodeRef x{j, i};
          auto fs = f_family(x);
          std::vector<std::pair<std::size_t, std::size_t>> pairs;
          if (req.which == TreeEstimate::shifted_seminorm) {
            std::size_t p_lo = req.p ? req.p : 1, p_hi = req.p ? req.p : j + 1;
            for (std::size_t pp = p_lo; pp <= p_hi; ++pp) {
              if (req.p_prime) {
                if (*req.p_prime < pp && pp - *req.p_prime <= j) pairs.emplace_back(pp, *req.p_prime);
              } else {
                for (std::size_t pq = 0; pq < pp; ++pq)
                  if (pp - pq <= j) pairs.emplace_back(pp, pq);
              }
            }
          } else {
            if (req.p) {
              if (req.p <= j) pairs.emplace_back(req.p, 0);
            } else {
              for (std::size_t pp = 1; pp <= j; ++pp) pairs.emplace_back(pp, 0);
            }
          }
          for (auto [pp, pq] : pairs) {
            if (!th.has_term(pp)) continue;
            for (auto& f : fs) rep.rows.push_back(shift_row(x, f, pp, pq));
          }
        }
      if (rep.rows.empty()) {
        InequalityCheck c;
        c.name = rep.which;
        c.params = "no applicable (node, p)";
        rep.rows.push_back(c);
      }
      break;
    }
    case TreeEstimate::node_norm:
    case TreeEstimate::root_norm: {
      auto one = [&](NodeRef x, bool root_form) {
        InequalityCheck c;
        c.name = rep.which;
        c.certified = certified;
        const unsigned big_j = x.level;
        const AvgNode& n = t.node(x);
        c.lhs = root_form ? ev.norm(n.vec) : ev.norm_Np(n.vec, t.max_coord(x.level, x.index - 1), 0);
        const Rational tail = eps_sum(subtree(t, x, big_j));
        auto leaves = descendants_at(x, 0);
        Rational best(-1);
        std::size_t best_p = 0;
        for (std::size_t pp = big_j; pp <= big_j + req.p_extra && th.has_term(pp); ++pp) {
          std::vector<Rational> vals;
          for (auto r : leaves) vals.push_back(th.term(pp) / th.term(pp - big_j) * aux(r, pp - big_j));
          Rational v = second_largest(vals) + tail;
          if (v > best) {
            best = v;
            best_p = pp;
          }
        }
        c.rhs = best;
        c.params = "node=(" + std::to_string(x.level) + "," + std::to_string(x.index) +
                   "),F_1=" + detail::interval_str(n.ran()) + ",p_1=" + std::to_string(best_p);
        c.status = c.lhs <= c.rhs ? CheckStatus::holds : CheckStatus::inconclusive;
        return c;
      };
      if (req.which == TreeEstimate::root_norm) {
        rep.rows.push_back(one({t.M, 1}, true));
      } else {
        for (unsigned j = 1; j <= t.M; ++j)
          for (std::size_t i = 1; i <= t.count(j); ++i) rep.rows.push_back(one({j, i}, false));
      }
      break;
    }
  }
  return rep;
}

struct DeltaReport {
  std::size_t j = 0;
  std::vector<FinVec> family;  // y_i = a_i x_i
  Rational lhs{0};             // ||sum y_i||
  Rational rhs{0};             // sum ||y_i||
  Rational ratio{0};
  bool admissible = false;     // ranges of the y_i form a j-admissible family
};

// ||sum a_i x_i|| / sum a_i ||x_i|| for the (j, eps, N) average of base.
inline DeltaReport estimate_delta_upper(const NormEvaluator& ev, const BlockSequence& base, std::size_t j,
                                        const EpsSchedule& eps, std::int64_t big_n = 1,
                                        const AverageBudget& budget = {}) {
  DeltaReport r;
  r.j = j;
  AvgTree t = construct_average(base, static_cast<unsigned>(j), big_n, eps, false, Rational(0), budget);
  auto w = t.root_weights();
  schreier::IntervalSeq ranges;
  for (std::size_t s = 1; s <= t.count(0); ++s) {
    FinVec y = t.node(0, s).vec.scaled(w[s - 1].second);
    r.rhs += ev.norm(y);
    ranges.push_back({y.min_index(), y.max_index()});
    r.family.push_back(std::move(y));
  }
  r.lhs = ev.norm(t.root().vec);
  r.ratio = r.lhs / r.rhs;
  r.admissible = schreier::is_admissible(ranges, schreier::OrdinalIndex::finite(static_cast<unsigned>(j)));
  return r;
}

struct DeltaLowerCertificate {
  Rational value{0};
  std::string certificate;
  std::size_t samples = 0;
  std::size_t passed = 0;
  bool all_pass() const { return samples == passed; }
};

// theta_j, with seeded spot checks of ||sum y_i|| >= theta_j sum ||y_i||
// on j-admissible families of random blocks.
inline DeltaLowerCertificate delta_lower_certificate(const NormEvaluator& ev, std::size_t j, std::uint64_t seed = 1,
                                                     std::size_t samples = 20) {
  DeltaLowerCertificate c;
  const ThetaSeq& th = ev.space();
  c.value = th.term(j);
  c.certificate = j == 0 ? "a single vector: ratio 1"
                         : "a j-admissible family (E_i) with E_i = ran(y_i) enters the sup defining the norm with "
                           "weight theta_j, so ||sum y_i|| >= theta_j sum ||E_i sum y|| = theta_j sum ||y_i||";
  Rng rng(seed);
  for (std::size_t smp = 0; smp < samples; ++smp) {
    std::int64_t start = rng.uniform(1, 6);
    std::vector<FinVec> ys;
    schreier::IntervalSeq ranges;
    const std::size_t want = static_cast<std::size_t>(rng.uniform(1, 5));
    for (std::size_t i = 0; i < want; ++i) {
      std::int64_t len = rng.uniform(1, 3);
      FinVec y = rng.vector_in(start, start + len - 1, static_cast<std::size_t>(len));
      schreier::IntervalSeq next = ranges;
      next.push_back({y.min_index(), y.max_index()});
      if (j > 0 && !schreier::is_admissible(next, schreier::OrdinalIndex::finite(static_cast<unsigned>(j)))) break;
      if (j == 0 && !ys.empty()) break;
      ranges = std::move(next);
      ys.push_back(std::move(y));
      start += len + rng.uniform(0, 2);
    }
    FinVec sum;
    Rational total(0);
    for (auto& y : ys) {
      sum = sum + y;
      total += ev.norm(y);
    }
    ++c.samples;
    if (ev.norm(sum) >= c.value * total) ++c.passed;
  }
  return c;
}

struct FlatSearchBudget {
  unsigned max_depth = 2;
  std::size_t max_support = 400;
  std::vector<Rational> eps_choices{make_rational(9, 10), make_rational(1, 2)};
};

struct FlatReport {
  FinVec y;
  std::vector<Rational> ratios;  // ||y||_{N,p} / phi_p for p = 1..J
  bool success = false;
  bool degenerate = false;  // every seminorm vanished because N exceeds the support
  unsigned depth = 0;
  Rational eps_used{0};
  std::size_t candidates = 0;
  std::string note;
};

// Searches normalized iterated averages of base (the unit vectors by
// default) of depth 1..max_depth, built with N = 1 or the given N, for y with
// ||y||_{N,p} < phi_p (1 + eps) for p = 1..J.
// Heuristic: failing within budget says nothing about existence.
inline FlatReport find_flat_vector(const NormEvaluator& ev, std::size_t big_j, std::int64_t big_n, const Rational& eps,
                                   const FlatSearchBudget& budget = {},
                                   const BlockSequence& base = BlockSequence::unit_vectors()) {
  if (big_j == 0) throw Error("J must be >= 1");
  const ThetaSeq& th = ev.space();
  if (!th.theta_exact()) throw Uncertifiable("flat vector search needs an exact theta limit");
  FlatReport best;
  std::optional<Rational> best_score;
  AverageBudget ab;
  ab.max_support = budget.max_support;
  std::vector<std::int64_t> start_ns{1};
  if (big_n > 1) start_ns.push_back(big_n);
  for (unsigned d = 1; d <= budget.max_depth; ++d) {
    for (const Rational& e : budget.eps_choices)
      for (std::int64_t cn : start_ns) {
      AvgTree t;
      try {
        t = construct_average(base, d, cn, EpsSchedule::constant(e), false, Rational(0), ab);
      } catch (const BudgetExceeded&) {
        continue;
      }
      ++best.candidates;
      FinVec y = t.root().vec.scaled(Rational(1 / ev.norm(t.root().vec)));
      std::vector<Rational> ratios;
      Rational score(0);
      for (std::size_t p = 1; p <= big_j; ++p) {
        Rational r = ev.norm_Np(y, big_n, p) / phi(th, p);
        score = max(score, r);
        ratios.push_back(r);
      }
      if (!best_score || score < *best_score) {
        best_score = score;
        best.y = y;
        best.ratios = ratios;
        best.depth = d;
        best.eps_used = e;
      }
    }
  }
  if (!best_score) {
    best.note = "no candidate fits the budget";
    return best;
  }
  best.success = *best_score < 1 + eps;
  best.degenerate = sgn(*best_score) == 0;
  best.note = best.degenerate ? "N exceeds the support start; all seminorms vanish"
                              : (best.success ? "found" : "no candidate within budget is flat enough");
  return best;
}

}  // namespace tsl
