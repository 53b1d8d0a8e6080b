#include "tsl/averages.hpp"

#include <catch_amalgamated.hpp>

#include <chrono>

using namespace tsl;

namespace {

Rational q(long a, long b = 1) { return make_rational(a, b); }

FinVec flat(std::int64_t lo, std::int64_t hi, const Rational& c) {
  std::vector<FinVec::Entry> e;
  for (auto i = lo; i <= hi; ++i) e.emplace_back(i, c);
  return FinVec(e);
}

}  // namespace

TEST_CASE("level one average over the unit vectors") {
  auto t = construct_average(BlockSequence::unit_vectors(), 1, 1, EpsSchedule::constant(q(1, 2)));
  CHECK(t.root().vec == flat(5, 9, q(1, 5)));
  CHECK(t.root().k() == 5);
  CHECK(t.count(0) == 5);
  CHECK(t.node(0, 1).base_index == 5);
  CHECK(t.root().eps == q(1, 2));
}

TEST_CASE("level zero average is the first block") {
  auto t = construct_average(BlockSequence::unit_vectors(), 0, 3, EpsSchedule::constant(q(1, 2)));
  CHECK(t.root().vec == FinVec::unit(1));
  CHECK(t.levels.size() == 1);
}

TEST_CASE("level two average with epsilon 9/10") {
  auto t = construct_average(BlockSequence::unit_vectors(), 2, 1, EpsSchedule::constant(q(9, 10)));
  REQUIRE(t.count(1) == 3);
  CHECK(t.node(1, 1).ran() == Interval{3, 5});
  CHECK(t.node(1, 2).ran() == Interval{12, 23});
  CHECK(t.node(1, 3).ran() == Interval{52, 103});
  CHECK(t.root().vec.size() == 67);
  auto w = t.root_weights();
  CHECK(w.front() == std::pair<std::size_t, Rational>{3, q(1, 9)});
  CHECK(w.back() == std::pair<std::size_t, Rational>{103, q(1, 156)});
}

TEST_CASE("averages respect the length bound and the base index bound") {
  for (bool refine : {false, true}) {
    for (unsigned m = 1; m <= (refine ? 1u : 2u); ++m) {
      EpsSchedule eps(q(4, 5));
      eps.set_level(1, {q(4, 5), q(9, 10), q(1, 2)});
      auto base = BlockSequence::random_blocks(7, 3, 2);
      auto t = construct_average(base, m, 1, eps, refine, q(1, 2));
      for (unsigned j = 1; j <= m; ++j)
        for (std::size_t i = 1; i <= t.count(j); ++i) {
          const AvgNode& n = t.node(j, i);
          INFO("refine " << refine << " node " << j << "," << i);
          CHECK(Rational(static_cast<long>(n.k())) >
                average_length_bound(t.max_coord(j, i - 1), n.eps, refine, t.theta1));
          for (auto c : t.children(j, i)) CHECK(t.node(c).min_base >= n.k());
          if (i > 1) CHECK(n.eps <= t.node(j, i - 1).eps);
        }
    }
  }
}

TEST_CASE("epsilon schedules are clamped to be nonincreasing") {
  EpsSchedule e(q(1, 2));
  e.set_level(1, {q(1, 3), q(2, 3), q(1, 4)});
  CHECK(e.at(1, 1) == q(1, 3));
  CHECK(e.at(1, 2) == q(1, 3));
  CHECK(e.at(1, 3) == q(1, 4));
  CHECK(e.at(1, 9) == q(1, 4));
  CHECK(e.at(2, 4) == q(1, 2));
  CHECK_THROWS_AS(EpsSchedule(q(1)), Error);
}

TEST_CASE("oversized averages are refused") {
  AverageBudget b;
  b.max_k = 100;
  CHECK_THROWS_AS(construct_average(BlockSequence::unit_vectors(), 3, 1, EpsSchedule::constant(q(1, 10)), false,
                                    q(0), b),
                  BudgetExceeded);
  auto finite = BlockSequence::explicit_blocks("three", {FinVec::unit(1), FinVec::unit(2), FinVec::unit(3)});
  CHECK_THROWS_AS(construct_average(finite, 1, 1, EpsSchedule::constant(q(1, 2))), InsufficientPrefix);
}

TEST_CASE("minimal shrink examples") {
  std::vector<Interval> blocks{{1, 3}, {4, 6}, {7, 9}};
  CHECK(minimal_shrink({{2, 8}}, blocks) == IntervalSeq{{4, 6}});
  CHECK(minimal_shrink({{1, 6}}, blocks) == IntervalSeq{{1, 6}});
  CHECK(minimal_shrink({{2, 3}}, blocks).empty());
  CHECK(minimal_shrink({{1, 3}, {5, 9}}, blocks) == IntervalSeq{{1, 3}, {7, 9}});
}

TEST_CASE("subtree selections") {
  auto t = construct_average(BlockSequence::unit_vectors(), 2, 1, EpsSchedule::constant(q(9, 10)));
  NodeRef root{2, 1};
  auto full = subtree(t, root, 2);
  CHECK(full.size() == 4);
  CHECK(full.front() == root);
  auto strict = subtree(t, root, 3, SubtreeKind::strict);
  CHECK(strict.size() == 3 + 67);
  auto sel = subtree(t, root, 3, SubtreeKind::strict, Interval{1, 23});
  CHECK(sel.front() == root);
  CHECK(sel.size() == 1 + 2 + 15);
  CHECK_THROWS_AS(subtree(t, root, 2, SubtreeKind::strict, Interval{4, 23}), PreconditionViolation);
  CHECK(subtree(t, root, 1).size() == 1);
}

TEST_CASE("constructed averages have the listed properties") {
  NormEvaluator ev(ThetaSeq::harmonic());
  auto t = construct_average(BlockSequence::unit_vectors(), 1, 1, EpsSchedule::constant(q(1, 2)));
  auto rep = verify_average_properties(t, ev, 3, 8);
  INFO(rep.failures.size());
  CHECK(rep.ok());
  CHECK(rep.weight_sum == 1);

  NormEvaluator ts(ThetaSeq::geometric(q(1, 2)));
  auto base = BlockSequence::random_blocks(5, 2, 0).normalized(ts);
  auto t2 = construct_average(base, 2, 1, EpsSchedule::constant(q(9, 10)));
  auto rep2 = verify_average_properties(t2, ts, 9, 4);
  CHECK(rep2.weights_ok);
  CHECK(rep2.admissible_ok);
  CHECK(rep2.shrink_ok);
  CHECK(rep2.systems_sampled > 0);
}

TEST_CASE("norm of a level two average is fast enough") {
  auto t = construct_average(BlockSequence::unit_vectors(), 2, 1, EpsSchedule::constant(q(9, 10)));
  for (auto space : {ThetaSeq::harmonic(), ThetaSeq::geometric(q(1, 2))}) {
    NormEvaluator ev(space);
    auto start = std::chrono::steady_clock::now();
    Rational n = ev.norm(t.root().vec);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    INFO(space.id() << " norm " << to_string(n) << " in " << secs << "s");
    CHECK(n <= 1);
    CHECK(n >= space.term(2));
    CHECK(secs < 60);
  }
}
