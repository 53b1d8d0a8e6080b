#pragma once

// Named verification suites for `tsl verify`. Every suite returns rows of
// InequalityCheck so that one JSON/CSV writer covers all of them.

#include "tsl/averages.hpp"
#include "tsl/brute_force.hpp"
#include "tsl/corenorm.hpp"
#include "tsl/distort.hpp"
#include "tsl/estimates.hpp"
#include "tsl/json_io.hpp"
#include "tsl/random.hpp"
#include "tsl/schreier.hpp"
#include "tsl/thetaseq.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tsl::cli {

// Wall-clock guard checked between suite items.
class Deadline {
 public:
  Deadline() = default;
  explicit Deadline(std::optional<long> ms) {
    if (ms && *ms > 0) end_ = std::chrono::steady_clock::now() + std::chrono::milliseconds(*ms);
  }
  bool expired() const { return end_ && std::chrono::steady_clock::now() > *end_; }

 private:
  std::optional<std::chrono::steady_clock::time_point> end_;
};

struct SuiteParams {
  ThetaSeq space = ThetaSeq::geometric(make_rational(1, 2));
  std::uint64_t seed = 1;
  std::size_t count = 0;  // 0: suite default
  std::string sequence = "identity";
  unsigned alpha_max = 2;
  unsigned f_max = 8;
  std::string tree_path;
  Deadline deadline;
};

struct SuiteResult {
  std::string suite;
  io::json params = io::json::object();
  std::vector<InequalityCheck> rows;
  bool partial = false;  // stopped early by the time guard or a budget
  std::string note;

  std::size_t count(CheckStatus s) const {
    std::size_t c = 0;
    for (auto& r : rows) c += r.status == s;
    return c;
  }
  std::size_t failures() const { return count(CheckStatus::fails); }
};

inline InequalityCheck equality_row(std::string name, std::string params, const Rational& a, const Rational& b) {
  return {std::move(name), std::move(params), a, b, a == b ? CheckStatus::holds : CheckStatus::fails, true};
}

inline InequalityCheck flag_row(std::string name, std::string params, bool ok) {
  return {std::move(name), std::move(params), Rational(0), Rational(0), ok ? CheckStatus::holds : CheckStatus::fails,
          true};
}

inline InequalityCheck le_row(std::string name, std::string params, const Rational& lhs, const Rational& rhs) {
  return {std::move(name), std::move(params), lhs, rhs, lhs <= rhs ? CheckStatus::holds : CheckStatus::fails, true};
}

inline schreier::IndexSequence parse_sequence(const std::string& s) {
  using schreier::IndexSequence;
  auto args = [&](std::size_t open) {
    std::vector<std::int64_t> out;
    std::string inner = s.substr(open + 1, s.size() - open - 2);
    std::stringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoll(tok));
    return out;
  };
  if (s == "identity" || s == "naturals") return IndexSequence::identity();
  if (s == "evens") return IndexSequence::evens();
  auto open = s.find('(');
  if (open != std::string::npos && s.back() == ')') {
    const std::string head = s.substr(0, open);
    auto a = args(open);
    if (head == "shifted" && a.size() == 1) return IndexSequence::shifted(a[0]);
    if (head == "arithmetic" && a.size() == 2) return IndexSequence::arithmetic(a[0], a[1]);
    if (head == "geometric-indices" && a.size() == 1) return IndexSequence::geometric_indices(a[0]);
  }
  if (!s.empty() && s.front() == '[') {
    auto j = io::json::parse(s);
    return IndexSequence::explicit_prefix(j.get<std::vector<std::int64_t>>());
  }
  throw Error("unknown index sequence '" + s + "'");
}

namespace suites {

inline SuiteResult tsirelson_identity(const SuiteParams& p) {
  SuiteResult r;
  r.suite = "tsirelson-identity";
  const std::size_t count = p.count ? p.count : 200;
  r.params = {{"seed", p.seed}, {"count", count}, {"support", "[1,12]"}};
  NormEvaluator s1(ThetaSeq::custom({make_rational(1, 2)}, make_rational(1, 2)));
  NormEvaluator sn(ThetaSeq::geometric(make_rational(1, 2)));
  Rng rng(p.seed);
  for (std::size_t k = 0; k < count; ++k) {
    if (p.deadline.expired()) return r.partial = true, r;
    auto x = rng.vector_in(1, 12, 12);
    r.rows.push_back(equality_row("identity", x.to_string(), s1.norm(x), sn.norm(x)));
  }
  r.note = std::to_string(r.count(CheckStatus::holds)) + "/" + std::to_string(count) + " equal";
  return r;
}

inline SuiteResult schreier_laws(const SuiteParams& p) {
  SuiteResult r;
  r.suite = "schreier-laws";
  const int n = p.count ? static_cast<int>(p.count) : 12;
  if (n > 16) throw BudgetExceeded("schreier-laws enumerates subsets of {1..n}, n <= 16");
  const unsigned amax = p.alpha_max;
  r.params = {{"n", n}, {"alpha_max", amax}};
  using schreier::is_member;
  for (unsigned a = 0; a <= amax; ++a) {
    std::size_t members = 0, hered = 0, spread = 0, nest = 0, oracle = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      if (p.deadline.expired()) return r.partial = true, r;
      schreier::IndexSet f;
      for (int b = 0; b < n; ++b)
        if (mask & (1u << b)) f.push_back(b + 1);
      const bool in = is_member(f, a);
      if (in != schreier::is_member_by_enumeration(f, a)) ++oracle;
      if (!in) continue;
      ++members;
      for (std::size_t i = 0; i < f.size(); ++i) {
        auto g = f;
        g.erase(g.begin() + static_cast<long>(i));
        if (!is_member(g, a)) ++hered;
        auto h = f;
        ++h[i];
        if ((i + 1 == h.size() || h[i] < h[i + 1]) && !is_member(h, a)) ++spread;
      }
      if (!is_member(f, a + 1)) ++nest;
    }
    const std::string tag = "alpha=" + std::to_string(a) + " members=" + std::to_string(members);
    r.rows.push_back(flag_row("oracle", tag + " mismatches=" + std::to_string(oracle), oracle == 0));
    r.rows.push_back(flag_row("hereditary", tag + " violations=" + std::to_string(hered), hered == 0));
    r.rows.push_back(flag_row("spreading", tag + " violations=" + std::to_string(spread), spread == 0));
    r.rows.push_back(flag_row("nesting", tag + " violations=" + std::to_string(nest), nest == 0));
  }
  return r;
}

// (l_i)_{i in F} in S_a implies (l_{i+1})_{i in F} in S_a(N) (shift) or
// (l_i)_{i in F minus min F} in S_a(N) (drop-min), for the subsequence L of N
// built by the construction.
inline SuiteResult subsequence_shift(const SuiteParams& p, bool drop_min) {
  SuiteResult r;
  r.suite = drop_min ? "subsequence-drop-min" : "subsequence-shift";
  r.params = {{"N", p.sequence}, {"alpha_max", p.alpha_max}, {"f_max", p.f_max}};
  auto seq = parse_sequence(p.sequence);
  auto l = schreier::shift_stable_subsequence(seq, p.f_max + 1);
  r.params["L"] = l;
  auto rep = drop_min ? schreier::verify_drop_min_implication(seq, l, p.alpha_max, p.f_max)
                      : schreier::verify_shift_implication(seq, l, p.alpha_max, p.f_max);
  for (auto& c : rep.counterexamples) {
    std::string f;
    for (auto v : c.f) f += (f.empty() ? "" : ",") + std::to_string(v);
    r.rows.push_back(flag_row("counterexample", "alpha=" + std::to_string(c.alpha) + " F={" + f + "}", false));
  }
  r.rows.push_back(flag_row("summary",
                            "checked=" + std::to_string(rep.checked) + " enumerated=" + std::to_string(rep.enumerated),
                            rep.ok()));
  return r;
}

inline SuiteResult oracle(const SuiteParams& p) {
  SuiteResult r;
  r.suite = "oracle";
  const std::size_t count = p.count ? p.count : 100;
  r.params = {{"space", p.space.id()}, {"seed", p.seed}, {"random_vectors", count}, {"binary_support", "[1,8]"}};
  NormEvaluator ev(p.space);
  for (std::uint32_t mask = 1; mask < (1u << 8); ++mask) {
    if (p.deadline.expired()) return r.partial = true, r;
    std::vector<std::int64_t> idx;
    for (int b = 0; b < 8; ++b)
      if (mask & (1u << b)) idx.push_back(b + 1);
    auto x = FinVec::indicator(idx);
    r.rows.push_back(equality_row("binary", x.to_string(), ev.norm(x), brute_force_norm(p.space, x)));
  }
  Rng rng(p.seed);
  for (std::size_t k = 0; k < count; ++k) {
    if (p.deadline.expired()) return r.partial = true, r;
    auto x = rng.vector_in(1, 10, 7);
    r.rows.push_back(equality_row("rational", x.to_string(), ev.norm(x), brute_force_norm(p.space, x)));
  }
  return r;
}

inline void add_average_rows(SuiteResult& r, const std::string& tag, const AverageReport& rep) {
  r.rows.push_back(equality_row("convex-combination", tag, rep.weight_sum, Rational(1)));
  r.rows.back().status = rep.weights_ok ? CheckStatus::holds : CheckStatus::fails;
  r.rows.push_back(flag_row("admissible-ranges", tag, rep.admissible_ok));
  r.rows.push_back(le_row("shrink-loss", tag + " systems=" + std::to_string(rep.systems_sampled), rep.loss_total,
                          rep.eps_total));
  r.rows.back().status = rep.shrink_ok ? CheckStatus::holds : CheckStatus::fails;
  for (auto& f : rep.failures) r.rows.push_back(flag_row("failure", f, false));
}

// Properties of a constructed average: the root is a convex combination of
// the base, node ranges are admissible, and minimal shrinking loses at most
// sum eps. Reads --tree when given, otherwise builds a few small trees.
inline SuiteResult tree_properties(const SuiteParams& p) {
  SuiteResult r;
  r.suite = "tree-properties";
  NormEvaluator ev(p.space);
  r.params = {{"space", p.space.id()}, {"seed", p.seed}};
  if (!p.tree_path.empty()) {
    std::ifstream in(p.tree_path);
    if (!in) throw Error("cannot read tree file " + p.tree_path);
    AvgTree t = io::tree_from(io::json::parse(in));
    r.params["tree"] = p.tree_path;
    add_average_rows(r, "file M=" + std::to_string(t.M), verify_average_properties(t, ev, p.seed));
    return r;
  }
  auto one = [&](const std::string& tag, const BlockSequence& base, unsigned m, const Rational& e) {
    try {
      AvgTree t = construct_average(base, m, 1, EpsSchedule::constant(e));
      add_average_rows(r, tag, verify_average_properties(t, ev, p.seed));
    } catch (const BudgetExceeded& ex) {
      r.rows.push_back({"construction", tag + ": " + ex.what(), Rational(0), Rational(0), CheckStatus::inconclusive,
                        false});
    }
  };
  for (unsigned m = 0; m <= 2; ++m)
    for (auto e : {make_rational(1, 2), make_rational(9, 10)}) {
      if (p.deadline.expired()) return r.partial = true, r;
      one("units M=" + std::to_string(m) + " eps=" + to_string(e), BlockSequence::unit_vectors(), m, e);
    }
  if (!p.deadline.expired())
    one("normalized random blocks M=2 eps=9/10", BlockSequence::random_blocks(p.seed, 2, 0).normalized(ev), 2,
        make_rational(9, 10));
  return r;
}

// ||x||_p <= (theta_p / theta_{p-1}) ||x||_{S_1,p-1} with equality at p = 1.
inline SuiteResult aux_norm_ratio(const SuiteParams& p) {
  SuiteResult r;
  r.suite = "aux-norm-ratio";
  const std::size_t count = p.count ? p.count : 100;
  r.params = {{"space", p.space.id()}, {"seed", p.seed}, {"count", count}, {"p_max", 4}};
  NormEvaluator ev(p.space);
  Rng rng(p.seed);
  for (std::size_t k = 0; k < count; ++k) {
    if (p.deadline.expired()) return r.partial = true, r;
    auto x = rng.vector_in(1, 16, 8);
    for (std::size_t q = 1; q <= 4 && p.space.has_term(q); ++q) {
      Rational lhs = ev.norm_p(x, q);
      Rational rhs = p.space.term(q) / p.space.term(q - 1) * ev.norm_SNp(x, 1, q - 1);
      const std::string tag = "p=" + std::to_string(q) + " x=" + x.to_string();
      r.rows.push_back(q == 1 ? equality_row("equality", tag, lhs, rhs) : le_row("bound", tag, lhs, rhs));
    }
  }
  return r;
}

inline SuiteResult regularization(const SuiteParams& p) {
  SuiteResult r;
  r.suite = "regularization";
  const std::size_t count = p.count ? p.count : 20;
  const std::size_t n = 10;
  r.params = {{"seed", p.seed}, {"count", count}, {"n", n}};
  Rng rng(p.seed);
  for (std::size_t trial = 0; trial < count; ++trial) {
    if (p.deadline.expired()) return r.partial = true, r;
    std::vector<Rational> t;
    Rational cur = make_rational(rng.uniform(50, 99), 100);
    for (std::size_t i = 0; i < n; ++i) {
      t.push_back(cur);
      cur = cur * make_rational(rng.uniform(30, 100), 100);
    }
    ThetaSeq raw = ThetaSeq::custom(t);
    ThetaSeq reg = regularize(raw, n);
    for (std::size_t m = 1; m <= n; ++m)
      r.rows.push_back(equality_row("composition", raw.id() + " n=" + std::to_string(m), reg.term(m),
                                    best_composition_by_enumeration(raw, m)));
    r.rows.push_back(flag_row("idempotent", raw.id(), regularize(reg, n) == reg));
  }
  return r;
}

// |sum x_i| >= a sum |x_i| on 1-admissible families and the equivalence
// envelope, for n = 1, 2, 3.
inline SuiteResult delta1(const SuiteParams& p) {
  SuiteResult r;
  r.suite = "delta1";
  const std::size_t count = p.count ? p.count : 50;
  r.params = {{"space", p.space.id()}, {"seed", p.seed}, {"families", count}, {"n", {1, 2, 3}}};
  auto ev = std::make_shared<const NormEvaluator>(p.space);
  for (std::size_t n = 1; n <= 3; ++n) {
    if (p.deadline.expired()) return r.partial = true, r;
    DistortionNorm dn(ev, n);
    auto rep = delta1_check(dn, count, p.seed);
    for (auto& s : rep.samples) {
      FinVec sum;
      std::string blocks;
      for (auto& b : s.blocks) {
        sum = sum + b;
        blocks += b.to_string();
      }
      const std::string tag = "n=" + std::to_string(n) + " " + blocks;
      r.rows.push_back(le_row("lower-estimate", tag, s.rhs, s.lhs));
      auto env = envelope_check(dn, sum);
      r.rows.push_back(le_row("envelope-lower", tag, env.lower, env.value));
      r.rows.push_back(le_row("envelope-upper", tag, env.value, env.upper));
    }
  }
  return r;
}

// Long averages of unit vectors and of normalized random blocks, and the
// tree estimates on refined level one averages.
inline SuiteResult estimates(const SuiteParams& p) {
  SuiteResult r;
  r.suite = "estimates";
  r.params = {{"space", p.space.id()}, {"seed", p.seed}};
  NormEvaluator ev(p.space);
  const Rational half = make_rational(1, 2);
  std::vector<std::vector<FinVec>> families;
  {
    std::vector<FinVec> units;
    for (std::int64_t i = 1; i <= 25; ++i) units.push_back(FinVec::unit(25 + i));
    families.push_back(units);
  }
  Rng rng(p.seed);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<FinVec> blocks;
    std::int64_t start = 30;
    for (int i = 0; i < 30; ++i) {
      FinVec b = rng.vector_in(start, start + 2, 3);
      blocks.push_back(b.scaled(Rational(1 / ev.norm(b))));
      start = b.max_index() + 1 + rng.uniform(0, 1);
    }
    families.push_back(blocks);
  }
  for (auto& fam : families)
    for (std::size_t q = 1; q <= 3 && p.space.has_term(q); ++q) {
      if (p.deadline.expired()) return r.partial = true, r;
      auto rep = check_longaverage(ev, fam, std::nullopt, 1, q, half);
      r.rows.push_back(rep.part1);
      r.rows.push_back(rep.part2);
    }
  if (!p.space.has_term(2)) return r;
  AvgTree tree = construct_average(BlockSequence::unit_vectors(), 1, 2, EpsSchedule::constant(half), true,
                                   p.space.term(1));
  for (auto w : {TreeEstimate::restricted_seminorm, TreeEstimate::shifted_seminorm, TreeEstimate::restricted_seminorm, TreeEstimate::node_norm, TreeEstimate::root_norm}) {
    if (p.deadline.expired()) return r.partial = true, r;
    TreeEstimateRequest req;
    req.which = w;
    auto rep = check_tree_estimates(ev, tree, req);
    r.rows.insert(r.rows.end(), rep.rows.begin(), rep.rows.end());
  }
  return r;
}

}  // namespace suites

inline const std::map<std::string, std::function<SuiteResult(const SuiteParams&)>>& suite_table() {
  static const std::map<std::string, std::function<SuiteResult(const SuiteParams&)>> table{
      {"tsirelson-identity", suites::tsirelson_identity},
      {"schreier-laws", suites::schreier_laws},
      {"subsequence-shift", [](const SuiteParams& p) { return suites::subsequence_shift(p, false); }},
      {"subsequence-drop-min", [](const SuiteParams& p) { return suites::subsequence_shift(p, true); }},
      {"oracle", suites::oracle},
      {"tree-properties", suites::tree_properties},
      {"aux-norm-ratio", suites::aux_norm_ratio},
      {"regularization", suites::regularization},
      {"delta1", suites::delta1},
      {"estimates", suites::estimates},
  };
  return table;
}

inline io::json suite_json(const SuiteResult& r) {
  io::json rows = io::json::array();
  for (auto& c : r.rows) rows.push_back(io::check_json(c));
  return io::json{{"suite", r.suite},
                  {"params", r.params},
                  {"holds", r.count(CheckStatus::holds)},
                  {"fails", r.count(CheckStatus::fails)},
                  {"inconclusive", r.count(CheckStatus::inconclusive)},
                  {"vacuous", r.count(CheckStatus::vacuous)},
                  {"partial", r.partial},
                  {"note", r.note},
                  {"rows", rows}};
}

}  // namespace tsl::cli
