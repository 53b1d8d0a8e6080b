#include "oracles.hpp"
#include "tsl/schreier.hpp"

#include <catch_amalgamated.hpp>

using namespace tsl;
using namespace tsl::schreier;

TEST_CASE("membership examples") {
  CHECK(is_member(IndexSet{5}, 0));
  CHECK(is_member(IndexSet{}, 0));
  CHECK(is_member(IndexSet{}, 3));
  CHECK(is_member(IndexSet{}, OrdinalIndex::omega_index()));
  CHECK_FALSE(is_member(IndexSet{2, 3, 4}, 1));
  CHECK(is_member(IndexSet{3, 4, 5}, 1));
  CHECK(is_member(IndexSet{2, 3, 4, 5, 6}, 2));
  CHECK_FALSE(is_member(IndexSet{1, 2}, 5));
  CHECK_THROWS_AS(is_member(IndexSet{3, 2}, 1), Error);
}

TEST_CASE("admissibility examples") {
  CHECK(is_admissible({{3, 4}, {5, 7}, {9, 9}}, OrdinalIndex::finite(1)));
  CHECK(is_admissible({{1, 40}}, OrdinalIndex::finite(0)));
  CHECK_FALSE(is_admissible({{1, 1}, {2, 2}}, OrdinalIndex::finite(1)));
  CHECK_THROWS_AS(is_admissible({{1, 3}, {3, 4}}, OrdinalIndex::finite(1)), Error);
}

TEST_CASE("greedy membership agrees with the bottom-up table on {1..12}") {
  oracle::SchreierTable table(12, 3);
  for (unsigned level = 0; level <= 3; ++level)
    for (std::uint32_t m = 0; m < (1u << 12); ++m) {
      auto f = oracle::mask_to_set(m);
      INFO("level " << level << " mask " << m);
      REQUIRE(is_member(f, level) == table.contains(level, m));
    }
}

TEST_CASE("enumeration membership agrees with the bottom-up table on {1..10}") {
  oracle::SchreierTable table(10, 3);
  for (unsigned level = 0; level <= 3; ++level)
    for (std::uint32_t m = 0; m < (1u << 10); ++m)
      REQUIRE(is_member_by_enumeration(oracle::mask_to_set(m), level) == table.contains(level, m));
}

TEST_CASE("omega membership is membership at level min F") {
  oracle::SchreierTable table(10, 10);
  for (std::uint32_t m = 1; m < (1u << 10); ++m) {
    auto f = oracle::mask_to_set(m);
    REQUIRE(is_member(f, OrdinalIndex::omega_index()) == table.contains(static_cast<int>(f[0]), m));
  }
}

TEST_CASE("hereditary: subsets of members are members") {
  oracle::SchreierTable table(12, 3);
  for (unsigned level = 0; level <= 3; ++level)
    for (std::uint32_t m = 0; m < (1u << 12); ++m) {
      if (!is_member(oracle::mask_to_set(m), level)) continue;
      for (std::uint32_t g = m;; g = (g - 1) & m) {
        REQUIRE(is_member(oracle::mask_to_set(g), level));
        if (g == 0) break;
      }
    }
}

TEST_CASE("spreading: coordinatewise larger sets stay members") {
  for (unsigned level = 0; level <= 3; ++level)
    for (std::uint32_t m = 1; m < (1u << 12); ++m) {
      auto f = oracle::mask_to_set(m);
      if (f.size() > 6 || !is_member(f, level)) continue;
      // every strictly increasing g within {1..14} with g_i >= f_i
      std::vector<std::int64_t> g(f.size());
      auto rec = [&](auto&& self, std::size_t i, std::int64_t prev) -> void {
        if (i == f.size()) {
          REQUIRE(is_member(g, level));
          return;
        }
        for (std::int64_t v = std::max(f[i], prev + 1); v <= 14; ++v) {
          g[i] = v;
          self(self, i + 1, v);
        }
      };
      if (f.size() <= 3 || m % 7 == 0) rec(rec, 0, 0);
    }
}

TEST_CASE("nesting: S_a is contained in S_{a+1}") {
  for (unsigned level = 0; level <= 2; ++level)
    for (std::uint32_t m = 0; m < (1u << 12); ++m) {
      auto f = oracle::mask_to_set(m);
      if (is_member(f, level)) REQUIRE(is_member(f, level + 1));
    }
}

TEST_CASE("membership in S_a(N)") {
  auto evens = IndexSequence::evens();
  CHECK(is_member_of_N({4, 8}, OrdinalIndex::finite(1), evens));
  CHECK(is_member_of_N({}, OrdinalIndex::finite(0), evens));
  CHECK(is_member_of_N({2}, OrdinalIndex::finite(0), evens));
  CHECK_FALSE(is_member_of_N({2, 4}, OrdinalIndex::finite(1), evens));
  CHECK_THROWS_AS(is_member_of_N({3}, OrdinalIndex::finite(1), evens), InsufficientPrefix);
  auto prefix = IndexSequence::explicit_prefix({2, 5, 9});
  CHECK(is_member_of_N({5, 9}, OrdinalIndex::finite(1), prefix));
  CHECK_THROWS_AS(is_member_of_N({11}, OrdinalIndex::finite(1), prefix), InsufficientPrefix);
}

TEST_CASE("index sequence rules") {
  CHECK(IndexSequence::shifted(2).at(1) == 3);
  CHECK(IndexSequence::arithmetic(3, 5).at(3) == 13);
  CHECK(IndexSequence::geometric_indices(3).at(4) == 81);
  CHECK(IndexSequence::geometric_indices(2).position_of(32) == 5);
  CHECK(IndexSequence::geometric_indices(2).position_of(12) == 0);
  CHECK(IndexSequence::arithmetic(3, 5).position_of(13) == 3);
  CHECK_THROWS_AS(IndexSequence::explicit_prefix({1, 2}).at(3), InsufficientPrefix);
  CHECK_THROWS_AS(IndexSequence::geometric_indices(10).at(30), InsufficientPrefix);
}

TEST_CASE("subsequence construction examples") {
  CHECK(shift_stable_subsequence(IndexSequence::evens(), 4) == IndexSet{4, 8, 16, 32});
  CHECK(shift_stable_subsequence(IndexSequence::identity(), 3) == IndexSet{1, 2, 3});
  CHECK(shift_stable_subsequence(IndexSequence::shifted(2), 3) == IndexSet{5, 7, 9});
  CHECK_THROWS_AS(shift_stable_subsequence(IndexSequence::explicit_prefix({2, 4, 6}), 3), InsufficientPrefix);
}

TEST_CASE("shift implications hold for constructed subsequences") {
  for (auto seq : {IndexSequence::identity(), IndexSequence::evens(), IndexSequence::shifted(3),
                   IndexSequence::arithmetic(2, 3)}) {
    auto l = shift_stable_subsequence(seq, 11);
    auto rep = verify_shift_implication(seq, l, 2, 8);
    INFO(seq.id());
    CHECK(rep.ok());
    CHECK(rep.checked > 0);
    auto rep2 = verify_drop_min_implication(seq, l, 2, 8);
    CHECK(rep2.ok());
  }
  auto id = IndexSequence::identity();
  auto l = shift_stable_subsequence(id, 11);
  CHECK(verify_shift_implication(id, l, 3, 10).ok());
  CHECK(verify_drop_min_implication(id, l, 2, 8).ok());
}

TEST_CASE("unconstructed subsequences can fail the shift implication") {
  auto evens = IndexSequence::evens();
  IndexSet l;
  for (int i = 1; i <= 9; ++i) l.push_back(evens.at(i));
  auto rep = verify_shift_implication(evens, l, 2, 8);
  CHECK_FALSE(rep.ok());
  CHECK_THROWS_AS(verify_shift_implication(evens, IndexSet{2, 4}, 1, 8), InsufficientPrefix);
}
