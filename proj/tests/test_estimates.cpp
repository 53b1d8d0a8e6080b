#include "tsl/estimates.hpp"

#include <catch_amalgamated.hpp>

using namespace tsl;

namespace {

Rational q(long a, long b = 1) { return make_rational(a, b); }

const ThetaSeq tsirelson = ThetaSeq::geometric(q(1, 2));
const ThetaSeq harmonic = ThetaSeq::harmonic();

std::vector<FinVec> shifted_units(std::int64_t k) {
  std::vector<FinVec> b;
  for (std::int64_t i = 1; i <= k; ++i) b.push_back(FinVec::unit(k + i));
  return b;
}

}  // namespace

TEST_CASE("star drops one copy of the maximum") {
  auto a = star({q(1), q(3), q(2), q(3)});
  CHECK(a.size() == 3);
  CHECK(std::count(a.begin(), a.end(), q(3)) == 1);
  CHECK(star({q(5)}).empty());
  CHECK_THROWS_AS(star({}), Error);
  CHECK(second_largest({q(1), q(3), q(2)}) == 2);
  CHECK(second_largest({q(3), q(3)}) == 3);
  CHECK(second_largest({q(3)}) == 0);
}

TEST_CASE("star averages: exhaustive small cases") {
  // values on a grid in [0, 1], N sets with total size <= k, eps = N / k
  const std::vector<Rational> grid{q(0), q(1, 3), q(1, 2), q(1)};
  std::size_t checked = 0;
  for (std::size_t big_n = 1; big_n <= 2; ++big_n)
    for (std::size_t k = big_n; k <= 4; ++k) {
      const Rational eps = Rational(static_cast<long>(big_n)) / static_cast<long>(k);
      // every multiset assignment: each set gets a size and values
      std::vector<std::vector<Rational>> sets(big_n);
      auto fill = [&](auto&& self, std::size_t set, std::size_t left) -> void {
        if (set == big_n) {
          bool nonempty = true;
          for (auto& a : sets) nonempty = nonempty && !a.empty();
          if (!nonempty) return;
          auto c = star_average_check(sets, q(1), eps, k);
          REQUIRE(c.hypotheses);
          REQUIRE(c.holds);
          ++checked;
          return;
        }
        self(self, set + 1, left);
        if (left == 0) return;
        for (auto& v : grid) {
          if (!sets[set].empty() && v < sets[set].back()) continue;
          sets[set].push_back(v);
          self(self, set, left - 1);
          sets[set].pop_back();
        }
      };
      fill(fill, 0, k);
    }
  CHECK(checked > 100);
}

TEST_CASE("long averages of unit vectors") {
  NormEvaluator t(tsirelson);
  auto rep = check_longaverage(t, shifted_units(25), std::nullopt, 1, 1, q(1, 2));
  CHECK(rep.part1.status == CheckStatus::holds);
  CHECK(rep.part1.lhs == q(1, 2));
  CHECK(rep.part1.rhs == 1);
  CHECK(rep.part2.status == CheckStatus::holds);

  auto off = check_longaverage(t, shifted_units(25), Interval{1, 10}, 1, 1, q(1, 2));
  CHECK(off.part1.status == CheckStatus::vacuous);
  CHECK(off.part1.lhs == 0);

  NormEvaluator h(harmonic);
  auto hr = check_longaverage(h, shifted_units(25), std::nullopt, 1, 2, q(1, 2));
  CHECK(hr.part1.status == CheckStatus::holds);
  CHECK(hr.part2.status == CheckStatus::holds);

  CHECK_THROWS_AS(check_longaverage(t, shifted_units(20), std::nullopt, 1, 1, q(1, 2)), PreconditionViolation);
  std::vector<FinVec> pairs;
  for (std::int64_t i = 0; i < 25; ++i) pairs.push_back(FinVec::indicator({30 + 2 * i, 31 + 2 * i}));
  CHECK_NOTHROW(check_longaverage(t, pairs, Interval{30, 61}, 1, 1, q(1, 2)));
  CHECK_THROWS_AS(check_longaverage(t, pairs, Interval{31, 61}, 1, 1, q(1, 2)), PreconditionViolation);
}

TEST_CASE("long averages of random normalized blocks") {
  NormEvaluator t(tsirelson);
  Rng rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<FinVec> blocks;
    std::int64_t start = 30;
    for (int i = 0; i < 30; ++i) {
      FinVec b = rng.vector_in(start, start + 2, 3);
      blocks.push_back(b.scaled(Rational(1 / t.norm(b))));
      start = b.max_index() + 1 + rng.uniform(0, 1);
    }
    for (std::size_t p = 1; p <= 3; ++p) {
      auto rep = check_longaverage(t, blocks, std::nullopt, 1, p, q(1, 2));
      INFO("trial " << trial << " p " << p);
      CHECK(rep.part1.status == CheckStatus::holds);
      CHECK(rep.part2.status == CheckStatus::holds);
    }
  }
}

TEST_CASE("tree estimates on a level one average") {
  NormEvaluator t(tsirelson);
  auto tree = construct_average(BlockSequence::unit_vectors(), 1, 1, EpsSchedule::constant(q(1, 2)));
  TreeEstimateRequest req;
  req.which = TreeEstimate::restricted_seminorm;
  req.p = 1;
  req.f = Interval{5, 9};
  auto rep = check_tree_estimates(t, tree, req);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].lhs == q(1, 2));
  CHECK(rep.rows[0].rhs == 1);
  CHECK(rep.rows[0].status == CheckStatus::holds);

  auto flat = construct_average(BlockSequence::unit_vectors(), 0, 1, EpsSchedule::constant(q(1, 2)));
  for (auto w : {TreeEstimate::restricted_seminorm, TreeEstimate::root_norm, TreeEstimate::node_norm}) {
    req.which = w;
    auto r0 = check_tree_estimates(t, flat, req);
    CHECK(r0.rows.size() == 1);
    CHECK(r0.rows[0].status == CheckStatus::vacuous);
  }
}

TEST_CASE("tree estimates on refined averages hold") {
  for (const auto& space : {tsirelson, harmonic}) {
    NormEvaluator ev(space);
    auto tree = construct_average(BlockSequence::unit_vectors(), 1, 2, EpsSchedule::constant(q(1, 2)), true,
                                  space.term(1));
    for (auto w : {TreeEstimate::restricted_seminorm, TreeEstimate::shifted_seminorm, TreeEstimate::restricted_seminorm, TreeEstimate::node_norm,
                   TreeEstimate::root_norm}) {
      TreeEstimateRequest req;
      req.which = w;
      auto rep = check_tree_estimates(ev, tree, req);
      INFO(space.id() << " " << to_string(w));
      CHECK(rep.ok());
      CHECK(rep.count(CheckStatus::inconclusive) == 0);
      CHECK(rep.rows.front().certified);
    }
  }
  NormEvaluator ev(harmonic);
  auto tree = construct_average(BlockSequence::unit_vectors(), 1, 1, EpsSchedule::constant(q(1, 2)), true, q(1, 3));
  TreeEstimateRequest req;
  CHECK_THROWS_AS(check_tree_estimates(ev, tree, req), Error);
}

TEST_CASE("root estimate on a level two harmonic average") {
  NormEvaluator ev(harmonic);
  auto tree = construct_average(BlockSequence::unit_vectors(), 2, 1, EpsSchedule::constant(q(9, 10)));
  TreeEstimateRequest req;
  req.which = TreeEstimate::root_norm;
  auto rep = check_tree_estimates(ev, tree, req);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].status == CheckStatus::holds);
  CHECK_FALSE(rep.rows[0].certified);
  req.which = TreeEstimate::node_norm;
  auto all = check_tree_estimates(ev, tree, req);
  CHECK(all.rows.size() == 4);
  CHECK(all.count(CheckStatus::holds) == 4);
}

TEST_CASE("delta upper estimates") {
  NormEvaluator h(harmonic);
  auto r = estimate_delta_upper(h, BlockSequence::unit_vectors(), 1, EpsSchedule::constant(q(1, 2)));
  CHECK(r.ratio == q(1, 2));
  CHECK(r.admissible);
  NormEvaluator t(tsirelson);
  CHECK(estimate_delta_upper(t, BlockSequence::unit_vectors(), 1, EpsSchedule::constant(q(1, 2))).ratio == q(1, 2));
  CHECK(estimate_delta_upper(t, BlockSequence::unit_vectors(), 0, EpsSchedule::constant(q(1, 2))).ratio == 1);
  for (std::size_t j = 1; j <= 2; ++j)
    for (const auto& space : {tsirelson, harmonic}) {
      NormEvaluator ev(space);
      auto e = q(9, 10);
      auto d = estimate_delta_upper(ev, BlockSequence::unit_vectors(), j, EpsSchedule::constant(e));
      CHECK(d.admissible);
      CHECK(d.ratio >= space.term(j));
      CHECK(d.ratio <= space.term(j) + e);
    }
}

TEST_CASE("delta lower certificates") {
  NormEvaluator t(tsirelson);
  auto c = delta_lower_certificate(t, 1, 4, 25);
  CHECK(c.value == q(1, 2));
  CHECK(c.all_pass());
  CHECK(c.samples == 25);
  NormEvaluator h(harmonic);
  auto c3 = delta_lower_certificate(h, 3, 5, 15);
  CHECK(c3.value == q(1, 4));
  CHECK(c3.all_pass());
}

TEST_CASE("flat vector search") {
  NormEvaluator t(tsirelson);
  auto easy = find_flat_vector(t, 3, 1, q(1));
  CHECK(easy.success);
  CHECK(t.norm(easy.y) == 1);

  NormEvaluator h(harmonic);
  FlatSearchBudget one_level;
  one_level.max_depth = 1;
  auto single = find_flat_vector(h, 1, 1, q(1), one_level);
  CHECK_FALSE(single.success);
  REQUIRE(single.ratios.size() == 1);
  CHECK(single.ratios[0] == 2);

  auto two = find_flat_vector(h, 1, 1, q(1));
  CHECK(two.candidates >= 2);
  CHECK(two.ratios.size() == 1);
  CHECK(h.norm(two.y) == 1);

  auto far = find_flat_vector(h, 2, 100000, q(1, 2));
  CHECK(far.degenerate);
  CHECK(far.success);
}
