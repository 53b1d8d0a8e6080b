#pragma once

#include "tsl/finvec.hpp"
#include "tsl/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace tsl {

// Seeded generator with platform-independent draws (mt19937_64 output is
// fully specified; the standard distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}

  // Uniform integer in [lo, hi].
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(g_());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do v = g_();
    while (v >= limit);
    return lo + static_cast<std::int64_t>(v % span);
  }

  bool coin() { return uniform(0, 1) == 1; }

  // Positive rational p/q with 1 <= p <= max_num, 1 <= q <= max_den.
  Rational positive_rational(std::int64_t max_num, std::int64_t max_den) {
    return make_rational(uniform(1, max_num), uniform(1, max_den));
  }

  // Vector with support a random nonempty subset of [lo, hi] of size at most
  // max_size, and coefficients from positive_rational, signs random.
  FinVec vector_in(std::int64_t lo, std::int64_t hi, std::size_t max_size, std::int64_t max_num = 5,
                   std::int64_t max_den = 4) {
    std::vector<std::int64_t> pool;
    for (std::int64_t i = lo; i <= hi; ++i) pool.push_back(i);
    std::size_t size = static_cast<std::size_t>(uniform(1, static_cast<std::int64_t>(std::min(max_size, pool.size()))));
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t j = i + static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(pool.size() - i - 1)));
      std::swap(pool[i], pool[j]);
    }
    std::vector<FinVec::Entry> e;
    for (std::size_t i = 0; i < size; ++i) {
      Rational c = positive_rational(max_num, max_den);
      if (coin()) c = -c;
      e.emplace_back(pool[i], c);
    }
    return FinVec(std::move(e));
  }

 private:
  std::mt19937_64 g_;
};

}  // namespace tsl
