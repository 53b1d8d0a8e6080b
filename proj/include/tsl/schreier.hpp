#pragma once

#include "tsl/rational.hpp"

#include <cstdint>
#include <algorithm>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tsl::schreier {

// Index of a Schreier family: a natural number, or omega with the
// fundamental sequence n -> n.
struct OrdinalIndex {
  bool omega = false;
  unsigned n = 0;

  static OrdinalIndex finite(unsigned n) { return {false, n}; }
  static OrdinalIndex omega_index() { return {true, 0}; }
  std::string to_string() const { return omega ? "omega" : std::to_string(n); }
  bool operator==(const OrdinalIndex&) const = default;
};

using IndexSet = std::vector<std::int64_t>;

struct Interval {
  std::int64_t lo = 1;
  std::int64_t hi = 1;
  bool operator==(const Interval&) const = default;
  bool contains(std::int64_t v) const { return lo <= v && v <= hi; }
};

using IntervalSeq = std::vector<Interval>;

inline bool is_valid_index_set(std::span<const std::int64_t> f) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] < 1) return false;
    if (i && f[i] <= f[i - 1]) return false;
  }
  return true;
}

inline bool is_valid_interval_seq(const IntervalSeq& e) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i].lo < 1 || e[i].lo > e[i].hi) return false;
    if (i && e[i].lo <= e[i - 1].hi) return false;
  }
  return true;
}

namespace detail {

// Length of the longest prefix of f lying in S_m (f nonempty, valid).
// The greedy choice is checked against exhaustive enumeration in the tests.
inline std::size_t longest_prefix(std::span<const std::int64_t> f, unsigned m) {
  if (f.empty()) return 0;
  if (m == 0) return 1;
  if (f[0] == 1) return 1;
  // With min >= 2, every set of size <= 2^m lies in S_m.
  if (m < 62 && f.size() <= (std::size_t{1} << m)) return f.size();
  if (m >= 62) return f.size();
  std::size_t pos = 0;
  std::int64_t blocks = 0;
  while (pos < f.size() && blocks < f[0]) {
    pos += longest_prefix(f.subspan(pos), m - 1);
    ++blocks;
  }
  return pos;
}

}  // namespace detail

inline bool is_member(std::span<const std::int64_t> f, OrdinalIndex a) {
  if (f.empty()) return true;
  if (!is_valid_index_set(f)) throw Error("invalid index set");
  std::int64_t level = a.omega ? f[0] : a.n;
  unsigned m = level > 4096 ? 4096u : static_cast<unsigned>(level);
  return detail::longest_prefix(f, m) == f.size();
}

inline bool is_member(const IndexSet& f, OrdinalIndex a) {
  return is_member(std::span<const std::int64_t>(f), a);
}

inline bool is_member(const IndexSet& f, unsigned n) { return is_member(f, OrdinalIndex::finite(n)); }

inline IndexSet left_endpoints(const IntervalSeq& e) {
  IndexSet mins;
  for (auto& iv : e) mins.push_back(iv.lo);
  return mins;
}

inline bool is_admissible(const IntervalSeq& e, OrdinalIndex a) {
  if (!is_valid_interval_seq(e)) throw Error("interval sequence is not successive");
  return is_member(left_endpoints(e), a);
}

// Direct recursive enumeration of all decompositions; exponential, meant for
// small sets only. Used by the brute-force norm so that it shares no
// combinatorics with the fast path.
inline bool is_member_by_enumeration(std::span<const std::int64_t> f, unsigned n) {
  if (f.empty()) return true;
  if (n == 0) return f.size() == 1;
  std::function<bool(std::size_t, std::int64_t)> split = [&](std::size_t start, std::int64_t blocks_left) {
    if (start == f.size()) return true;
    if (blocks_left == 0) return false;
    for (std::size_t end = start + 1; end <= f.size(); ++end)
      if (is_member_by_enumeration(f.subspan(start, end - start), n - 1) && split(end, blocks_left - 1))
        return true;
    return false;
  };
  return split(0, f[0]);
}

// An increasing sequence of positive integers, given by a rule or a finite
// explicit prefix. Terms are 1-based.
class IndexSequence {
 public:
  enum class Kind { identity, shifted, arithmetic, geometric_indices, explicit_prefix };

  static IndexSequence identity() { return IndexSequence(Kind::identity); }
  static IndexSequence shifted(std::int64_t k) {
    if (k < 0) throw Error("shifted(k) needs k >= 0");
    IndexSequence s(Kind::shifted);
    s.a_ = k;
    return s;
  }
  static IndexSequence arithmetic(std::int64_t a, std::int64_t d) {
    if (a < 1 || d < 1) throw Error("arithmetic(a,d) needs a >= 1, d >= 1");
    IndexSequence s(Kind::arithmetic);
    s.a_ = a;
    s.d_ = d;
    return s;
  }
  static IndexSequence evens() { return arithmetic(2, 2); }
  static IndexSequence geometric_indices(std::int64_t b) {
    if (b < 2) throw Error("geometric-indices(b) needs b >= 2");
    IndexSequence s(Kind::geometric_indices);
    s.a_ = b;
    return s;
  }
  static IndexSequence explicit_prefix(IndexSet prefix) {
    if (!is_valid_index_set(prefix)) throw Error("explicit sequence must be strictly increasing and >= 1");
    IndexSequence s(Kind::explicit_prefix);
    s.prefix_ = std::move(prefix);
    return s;
  }

  Kind kind() const { return kind_; }

  // i-th term, i >= 1.
  std::int64_t at(std::int64_t i) const {
    if (i < 1) throw Error("sequence positions start at 1");
    switch (kind_) {
      case Kind::identity: return i;
      case Kind::shifted: return i + a_;
      case Kind::arithmetic: return a_ + (i - 1) * d_;
      case Kind::geometric_indices: {
        std::int64_t v = 1;
        for (std::int64_t t = 0; t < i; ++t) {
          if (v > (INT64_MAX / a_)) throw InsufficientPrefix("geometric index overflows 64 bits");
          v *= a_;
        }
        return v;
      }
      case Kind::explicit_prefix:
        if (static_cast<std::size_t>(i) > prefix_.size())
          throw InsufficientPrefix("explicit prefix has only " + std::to_string(prefix_.size()) + " terms");
        return prefix_[static_cast<std::size_t>(i - 1)];
    }
    return 0;
  }

  // Position of value v in the sequence, or 0 when v is not a term.
  // Throws InsufficientPrefix if an explicit prefix ends before v could occur.
  std::int64_t position_of(std::int64_t v) const {
    if (v < 1) return 0;
    switch (kind_) {
      case Kind::identity: return v;
      case Kind::shifted: return v > a_ ? v - a_ : 0;
      case Kind::arithmetic:
        if (v < a_ || (v - a_) % d_ != 0) return 0;
        return (v - a_) / d_ + 1;
      case Kind::geometric_indices: {
        std::int64_t p = 0, x = v;
        while (x > 1 && x % a_ == 0) {
          x /= a_;
          ++p;
        }
        return (x == 1 && p >= 1) ? p : 0;
      }
      case Kind::explicit_prefix: {
        auto it = std::lower_bound(prefix_.begin(), prefix_.end(), v);
        if (it != prefix_.end() && *it == v) return (it - prefix_.begin()) + 1;
        if (it == prefix_.end()) throw InsufficientPrefix("value " + std::to_string(v) + " beyond explicit prefix");
        return 0;
      }
    }
    return 0;
  }

  std::string id() const {
    switch (kind_) {
      case Kind::identity: return "identity";
      case Kind::shifted: return "shifted(" + std::to_string(a_) + ")";
      case Kind::arithmetic: return "arithmetic(" + std::to_string(a_) + "," + std::to_string(d_) + ")";
      case Kind::geometric_indices: return "geometric-indices(" + std::to_string(a_) + ")";
      case Kind::explicit_prefix: {
        std::string s = "explicit[";
        for (std::size_t i = 0; i < prefix_.size(); ++i) s += (i ? "," : "") + std::to_string(prefix_[i]);
        return s + "]";
      }
    }
    return {};
  }

 private:
  explicit IndexSequence(Kind k) : kind_(k) {}
  Kind kind_;
  std::int64_t a_ = 0;
  std::int64_t d_ = 1;
  IndexSet prefix_;
};

// F in S_a(N): the positions of F's elements inside N form a set in S_a.
inline bool is_member_of_N(const IndexSet& f, OrdinalIndex a, const IndexSequence& seq) {
  IndexSet positions;
  positions.reserve(f.size());
  for (auto v : f) {
    std::int64_t p = seq.position_of(v);
    if (p == 0) throw InsufficientPrefix("value " + std::to_string(v) + " is not a term of " + seq.id());
    positions.push_back(p);
  }
  return is_member(positions, a);
}

// L = (l_i) with l_i = n_{m_i}, m_1 = n_1, m_{k+1} = max(n_{m_k}, m_k + 1).
inline IndexSet shift_stable_subsequence(const IndexSequence& seq, std::size_t prefix_len) {
  IndexSet out;
  if (prefix_len == 0) return out;
  std::int64_t m = seq.at(1);
  for (std::size_t k = 0; k < prefix_len; ++k) {
    std::int64_t l = seq.at(m);
    out.push_back(l);
    m = std::max(l, m + 1);
  }
  return out;
}

struct Counterexample {
  unsigned alpha = 0;
  IndexSet f;  // subset of {1..F_max}, positions in L
};

struct VerificationReport {
  std::size_t checked = 0;     // (alpha, F) pairs whose hypothesis held
  std::size_t enumerated = 0;  // all (alpha, F) pairs visited
  std::vector<Counterexample> counterexamples;
  bool ok() const { return counterexamples.empty(); }
};

namespace detail {

inline VerificationReport verify_shift(const IndexSequence& seq, const IndexSet& l, unsigned alpha_max,
                                       unsigned f_max, bool drop_min) {
  if (f_max > 24) throw BudgetExceeded("F_max above 24 is not enumerable");
  std::size_t need = drop_min ? f_max : f_max + 1;
  if (l.size() < need)
    throw InsufficientPrefix("L needs at least " + std::to_string(need) + " terms");
  VerificationReport rep;
  for (unsigned alpha = 0; alpha <= alpha_max; ++alpha) {
    for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << f_max); ++mask) {
      IndexSet f, image, shifted;
      for (unsigned b = 0; b < f_max; ++b)
        if (mask & (1u << b)) f.push_back(b + 1);
      ++rep.enumerated;
      for (auto i : f) image.push_back(l[static_cast<std::size_t>(i - 1)]);
      if (!is_member(image, alpha)) continue;
      ++rep.checked;
      if (drop_min) {
        shifted.assign(image.begin() + 1, image.end());
      } else {
        for (auto i : f) shifted.push_back(l[static_cast<std::size_t>(i)]);
      }
      if (!is_member_of_N(shifted, OrdinalIndex::finite(alpha), seq)) rep.counterexamples.push_back({alpha, f});
    }
  }
  return rep;
}

}  // namespace detail

// (l_i)_{i in F} in S_a  =>  (l_{i+1})_{i in F} in S_a(N), for all a <= alpha_max, F within {1..f_max}.
inline VerificationReport verify_shift_implication(const IndexSequence& seq, const IndexSet& l, unsigned alpha_max,
                                        unsigned f_max) {
  return detail::verify_shift(seq, l, alpha_max, f_max, false);
}

// (l_i)_{i in F} in S_a  =>  (l_i)_{i in F \ min F} in S_a(N).
inline VerificationReport verify_drop_min_implication(const IndexSequence& seq, const IndexSet& l, unsigned alpha_max,
                                       unsigned f_max) {
  return detail::verify_shift(seq, l, alpha_max, f_max, true);
}

}  // namespace tsl::schreier
