#include "tsl/brute_force.hpp"
#include "tsl/corenorm.hpp"
#include "tsl/random.hpp"

#include <catch_amalgamated.hpp>

using namespace tsl;

namespace {

Rational q(long a, long b = 1) { return make_rational(a, b); }

FinVec ones(std::initializer_list<std::int64_t> idx) { return FinVec::indicator(idx); }

FinVec flat(std::int64_t lo, std::int64_t hi, const Rational& c) {
  std::vector<FinVec::Entry> e;
  for (auto i = lo; i <= hi; ++i) e.emplace_back(i, c);
  return FinVec(e);
}

const ThetaSeq tsirelson = ThetaSeq::geometric(q(1, 2));
const ThetaSeq harmonic = ThetaSeq::harmonic();

}  // namespace

TEST_CASE("norm examples") {
  NormEvaluator t(tsirelson);
  CHECK(t.norm(FinVec::unit(5)) == 1);
  CHECK(t.norm(ones({1, 2})) == 1);
  CHECK(t.norm(ones({3, 4, 5})) == q(3, 2));
  CHECK(t.norm(FinVec()) == 0);
  NormEvaluator h(harmonic);
  CHECK(h.norm(flat(5, 9, q(1, 5))) == q(1, 2));
}

TEST_CASE("auxiliary norm examples") {
  NormEvaluator t(tsirelson);
  auto x = ones({3, 4, 5});
  CHECK(t.norm_p(x, 1) == q(3, 2));
  CHECK(t.norm_p(x, 0) == t.norm(x));
  CHECK(t.norm_p(FinVec::unit(1), 2) == q(1, 4));
  CHECK(t.norm_Np(FinVec::unit(1), 2, 1) == 0);
  CHECK(t.norm_Np(x, 1, 0) == q(3, 2));
  CHECK(t.norm_Np(x, 3, 0) == 3);
  CHECK(t.norm_SNp(x, 1, 0) == 3);
  CHECK(t.norm_SNp(ones({1, 2}), 1, 0) == 1);
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    auto y = rng.vector_in(1, 14, 7);
    for (std::size_t p = 0; p <= 3; ++p) CHECK(t.norm_SNp(y, 0, p) == t.norm_p(y, p));
  }
}

TEST_CASE("brute force examples") {
  CHECK(brute_force_norm(tsirelson, FinVec::unit(5)) == 1);
  CHECK(brute_force_norm(tsirelson, ones({1, 2})) == 1);
  CHECK(brute_force_norm(tsirelson, ones({3, 4, 5})) == q(3, 2));
  CHECK(brute_force_norm(harmonic, flat(5, 9, q(1, 5))) == q(1, 2));
  CHECK_THROWS_AS(brute_force_norm(tsirelson, flat(1, 9, q(1))), BudgetExceeded);
}

TEST_CASE("norm agrees with brute force on seeded vectors") {
  Rng rng(11);
  for (const auto& space : {tsirelson, harmonic, ThetaSeq::geometric(q(2, 3))}) {
    NormEvaluator ev(space);
    for (int k = 0; k < 40; ++k) {
      auto x = rng.vector_in(1, 10, 6);
      INFO(space.id() << " " << x.to_string());
      REQUIRE(ev.norm(x) == brute_force_norm(space, x));
    }
  }
}

TEST_CASE("norm agrees with brute force for a finite theta table") {
  auto space = ThetaSeq::custom({q(1, 2), q(1, 3)});
  NormEvaluator ev(space);
  Rng rng(5);
  for (int k = 0; k < 30; ++k) {
    auto x = rng.vector_in(1, 10, 6);
    REQUIRE(ev.norm(x) == brute_force_norm(space, x));
  }
}

TEST_CASE("witness reproduces the norm") {
  NormEvaluator t(tsirelson);
  auto w = t.witness(ones({3, 4, 5}));
  CHECK(w.q == 1);
  REQUIRE(w.children.size() == 3);
  CHECK(w.children[0].range == schreier::Interval{3, 3});
  CHECK(w.children[2].range == schreier::Interval{5, 5});
  CHECK(t.witness(FinVec::unit(5)).q == 0);
  NormEvaluator h(harmonic);
  auto hw = h.witness(flat(5, 9, q(1, 5)));
  CHECK(hw.q == 1);
  CHECK(hw.children.size() == 5);
  Rng rng(17);
  for (const auto& space : {tsirelson, harmonic}) {
    NormEvaluator ev(space);
    for (int k = 0; k < 40; ++k) {
      auto x = rng.vector_in(1, 30, 14);
      auto wit = ev.witness(x);
      REQUIRE(wit.value == ev.norm(x));
      REQUIRE(evaluate_witness(space, x, wit) == ev.norm(x));
    }
  }
}

TEST_CASE("norm invariants on seeded vectors") {
  Rng rng(23);
  for (const auto& space : {tsirelson, harmonic}) {
    NormEvaluator ev(space);
    for (int k = 0; k < 30; ++k) {
      auto x = rng.vector_in(1, 16, 9);
      const Rational n = ev.norm(x);
      CHECK(x.sup_norm() <= n);
      CHECK(n <= x.l1_norm());
      // unconditionality
      std::vector<FinVec::Entry> flipped;
      for (auto& [i, c] : x.entries()) flipped.emplace_back(i, rng.coin() ? Rational(-c) : c);
      CHECK(ev.norm(FinVec(flipped)) == n);
      // monotone under interval restriction
      for (auto a = x.min_index(); a <= x.max_index(); a += 2)
        for (auto b = a; b <= x.max_index(); b += 3) CHECK(ev.norm(x.restrict(a, b)) <= n);
      // definitional lower bound from singleton families and from halves
      for (std::size_t qq = 1; qq <= ev.q_max(x); ++qq) {
        schreier::IntervalSeq fam;
        for (auto i : x.support()) fam.push_back({i, i});
        while (!fam.empty() && !schreier::is_admissible(fam, schreier::OrdinalIndex::finite(qq))) fam.erase(fam.begin());
        Rational s(0);
        for (auto& e : fam) s += ev.norm(x.restrict(e.lo, e.hi));
        CHECK(space.term(qq) * s <= n);
      }
    }
  }
}

TEST_CASE("fixed point law: the norm is the best candidate built from norms of pieces") {
  Rng rng(29);
  NormEvaluator ev(tsirelson);
  for (int k = 0; k < 20; ++k) {
    auto x = rng.vector_in(1, 9, 6);
    const auto supp = x.support();
    const int s = static_cast<int>(supp.size());
    Rational best = x.sup_norm();
    // families of support-aligned intervals, each piece's norm from the evaluator
    for (std::size_t qq = 1; qq <= ev.q_max(x); ++qq) {
      for (std::uint32_t starts = 1; starts < (1u << s); ++starts) {
        for (std::uint32_t ends = 1; ends < (1u << s); ++ends) {
          schreier::IntervalSeq fam;
          bool ok = true;
          int open = -1;
          for (int t = 0; t < s && ok; ++t) {
            bool st = starts & (1u << t), en = ends & (1u << t);
            if (st) {
              if (open >= 0) ok = false;
              open = t;
            }
            if (en) {
              if (open < 0) ok = false;
              else {
                fam.push_back({supp[open], supp[t]});
                open = -1;
              }
            }
          }
          if (!ok || open >= 0 || fam.empty()) continue;
          if (fam.size() == 1 && fam[0].lo == supp.front() && fam[0].hi == supp.back()) continue;
          if (!schreier::is_admissible(fam, schreier::OrdinalIndex::finite(qq))) continue;
          Rational sum(0);
          for (auto& e : fam) sum += ev.norm(x.restrict(e.lo, e.hi));
          best = max(best, Rational(tsirelson.term(qq) * sum));
        }
      }
    }
    REQUIRE(best == ev.norm(x));
  }
}

TEST_CASE("Tsirelson identity on a few vectors") {
  Rng rng(31);
  NormEvaluator s1(ThetaSeq::custom({q(1, 2)}));
  NormEvaluator sn(tsirelson);
  for (int k = 0; k < 30; ++k) {
    auto x = rng.vector_in(1, 12, 12);
    REQUIRE(s1.norm(x) == sn.norm(x));
  }
}

TEST_CASE("right spreading does not decrease the norm") {
  Rng rng(37);
  NormEvaluator ev(tsirelson);
  for (int k = 0; k < 20; ++k) {
    auto x = rng.vector_in(1, 8, 5);
    std::vector<FinVec::Entry> moved;
    std::int64_t prev = 0;
    for (auto& [i, c] : x.entries()) {
      std::int64_t j = std::max(i + rng.uniform(0, 2), prev + 1);
      moved.emplace_back(j, c);
      prev = j;
    }
    FinVec y(moved);
    if (y.max_index() - y.min_index() >= 12) continue;
    REQUIRE(brute_force_norm(tsirelson, y) >= brute_force_norm(tsirelson, x));
    REQUIRE(ev.norm(y) >= ev.norm(x));
  }
}

TEST_CASE("ratio of consecutive auxiliary norms") {
  Rng rng(41);
  for (const auto& space : {tsirelson, harmonic}) {
    NormEvaluator ev(space);
    for (int k = 0; k < 20; ++k) {
      auto x = rng.vector_in(1, 20, 10);
      for (std::size_t p = 1; p <= 4; ++p) {
        Rational lhs = ev.norm_p(x, p);
        Rational rhs = space.term(p) / space.term(p - 1) * ev.norm_SNp(x, 1, p - 1);
        CHECK(lhs <= rhs);
        if (p == 1) CHECK(lhs == rhs);
      }
    }
  }
}
