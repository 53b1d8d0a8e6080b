#include "oracles.hpp"
#include "tsl/random.hpp"
#include "tsl/thetaseq.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace tsl;

namespace {

Rational q(long a, long b = 1) { return make_rational(a, b); }

const ThetaSeq tsirelson = ThetaSeq::geometric(q(1, 2));
const ThetaSeq harmonic = ThetaSeq::harmonic();

ThetaSeq dip(std::size_t k) {
  std::vector<Rational> t{q(9, 10)};
  while (t.size() < k) t.push_back(q(1, 2));
  return ThetaSeq::custom(t);
}

// Random nonincreasing table with entries in (0,1).
ThetaSeq random_monotone(Rng& rng, std::size_t k) {
  std::vector<Rational> t;
  Rational cur = make_rational(rng.uniform(50, 99), 100);
  for (std::size_t n = 0; n < k; ++n) {
    t.push_back(cur);
    cur = cur * make_rational(rng.uniform(30, 100), 100);
  }
  return ThetaSeq::custom(t);
}

}  // namespace

TEST_CASE("sequence rules") {
  CHECK(tsirelson.term(3) == q(1, 8));
  CHECK(harmonic.term(3) == q(1, 4));
  CHECK(tsirelson.term(0) == 1);
  CHECK(tsirelson.regular());
  CHECK(harmonic.regular());
  auto c = ThetaSeq::custom({q(1, 2), q(1, 3)});
  CHECK(c.max_index() == std::size_t{2});
  CHECK_THROWS_AS(c.term(3), InsufficientPrefix);
  CHECK_FALSE(ThetaSeq::custom({q(1, 2), q(3, 5)}).regular());
  CHECK_FALSE(ThetaSeq::custom({q(1, 2), q(1, 5)}).regular());
  CHECK_THROWS_AS(ThetaSeq::geometric(q(1)), Error);
  CHECK_THROWS_AS(ThetaSeq::custom({q(1, 2), q(1, 3)}, q(1, 2)), Error);
}

TEST_CASE("regularization examples") {
  CHECK(regularize(tsirelson, 12) == tsirelson);
  CHECK(regularize(harmonic, 12) == harmonic);
  auto r = regularize(dip(6), 6);
  CHECK(r.term(1) == q(9, 10));
  CHECK(r.term(2) == q(81, 100));
  CHECK(r.term(3) == q(729, 1000));
  CHECK(r.regular());
  CHECK_THROWS_AS(regularize(ThetaSeq::custom({q(1, 2), q(3, 5)}), 2), PreconditionViolation);
  CHECK_THROWS_AS(regularize(dip(3), 5), InsufficientPrefix);
}

TEST_CASE("regularization agrees with composition enumeration") {
  Rng rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    auto raw = random_monotone(rng, 10);
    auto reg = regularize(raw, 10);
    std::vector<Rational> t(11);
    for (std::size_t n = 1; n <= 10; ++n) t[n] = raw.term(n);
    for (int n = 1; n <= 10; ++n) REQUIRE(reg.term(n) == oracle::best_composition(t, n));
  }
  std::vector<Rational> h(11);
  for (std::size_t n = 1; n <= 10; ++n) h[n] = harmonic.term(n);
  for (int n = 1; n <= 10; ++n) CHECK(oracle::best_composition(h, n) == harmonic.term(n));
}

TEST_CASE("regularization laws") {
  Rng rng(19);
  for (int trial = 0; trial < 40; ++trial) {
    auto raw = random_monotone(rng, 12);
    auto reg = regularize(raw, 12);
    REQUIRE(reg.is_nonincreasing(12));
    REQUIRE(reg.is_supermultiplicative(12));
    for (std::size_t n = 1; n <= 12; ++n) REQUIRE(reg.term(n) >= raw.term(n));
    REQUIRE(regularize(reg, 12) == reg);
  }
}

TEST_CASE("phi values") {
  CHECK(phi(tsirelson, 5) == 1);
  CHECK(phi(harmonic, 3) == q(1, 4));
  CHECK(phi(harmonic, 1) == q(1, 2));
  CHECK_THROWS_AS(phi(dip(3), 1), Uncertifiable);
  auto c = ThetaSeq::custom({q(1, 3), q(1, 9), q(1, 27)}, q(1, 3));
  CHECK(phi(c, 3) == 1);
}

TEST_CASE("phi laws on regular sequences") {
  for (const auto& s : {tsirelson, harmonic, ThetaSeq::geometric(q(3, 7))}) {
    for (std::size_t n = 1; n <= 15; ++n) {
      CHECK(phi(s, n) <= 1);
      for (std::size_t m = 1; n + m <= 15; ++m) CHECK(phi(s, n + m) >= phi(s, n) * phi(s, m));
    }
  }
}

TEST_CASE("lower bounds for the limit") {
  CHECK(theta_lower_bound(tsirelson, 8) == q(1, 2));
  auto lb = theta_lower_bound(harmonic, 10);
  CHECK(lb < 1);
  CHECK(to_double(lb) >= std::pow(1.0 / 11, 0.1) - std::ldexp(1.0, -30));
  CHECK(theta_lower_bound(harmonic, 5) <= lb);
  auto first = theta_lower_bound(dip(3), 1);
  CHECK(first == q(9, 10));
}

TEST_CASE("first delta bound") {
  for (std::size_t j = 1; j <= 6; ++j)
    CHECK(bound_delta_j_v1(tsirelson, j, 20).value == pow(q(1, 2), j - 1));
  CHECK(bound_delta_j_v1(harmonic, 3, 20).value == q(1, 2));
  CHECK(bound_delta_j_v1(harmonic, 1, 20).value == 1);
  auto r = bound_delta_j_v1(harmonic, 2, 30);
  CHECK(r.range_max == r.value);
  CHECK(r.argmax == 2);
  CHECK_THROWS_AS(bound_delta_j_v1(dip(4), 1, 4), Uncertifiable);
}

TEST_CASE("second delta bound") {
  for (std::size_t j = 1; j <= 6; ++j) CHECK(bound_delta_j_v2(tsirelson, j, 20).value == pow(q(1, 2), j));
  auto r = bound_delta_j_v2(harmonic, 1, 50);
  CHECK(r.value == 1);
  CHECK_FALSE(r.attained);
  CHECK(r.range_max == q(50, 51));
  CHECK(r.argmax == 50);
  CHECK(bound_delta_j_v2(harmonic, 0, 5).value == 1);
  CHECK(bound_delta_j_v2(tsirelson, 0, 5).value == 1);
}

TEST_CASE("distortion target index") {
  CHECK(distortion_target_n(harmonic, q(2), 100) == 8);
  CHECK(distortion_target_n(harmonic, q(1, 2), 100) == 2);
  CHECK_THROWS_AS(distortion_target_n(tsirelson, q(2), 100), Uncertifiable);
  CHECK_THROWS_AS(distortion_target_n(harmonic, q(100), 50), BudgetExceeded);
}
