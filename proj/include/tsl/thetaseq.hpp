#pragma once

#include "tsl/rational.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tsl {

// The weight sequence (theta_n) of a mixed Tsirelson space.
//
// geometric(r): theta_n = r^n, limit r.
// harmonic:     theta_n = 1/(n+1), limit 1.
// custom:       a finite table theta_1..theta_K; the space then only uses
//               the families S_1..S_K.
class ThetaSeq {
 public:
  enum class Rule { geometric, harmonic, custom };

  static ThetaSeq geometric(const Rational& r) {
    if (!(sgn(r) > 0 && r < 1)) throw Error("geometric ratio must lie in (0,1)");
    ThetaSeq s(Rule::geometric);
    s.ratio_ = r;
    s.theta_exact_ = r;
    s.regular_ = true;
    return s;
  }

  static ThetaSeq harmonic() {
    ThetaSeq s(Rule::harmonic);
    s.theta_exact_ = Rational(1);
    s.regular_ = true;
    return s;
  }

  static ThetaSeq custom(std::vector<Rational> table, std::optional<Rational> theta_exact = std::nullopt) {
    if (table.empty()) throw Error("custom theta table is empty");
    for (auto& t : table)
      if (!(sgn(t) > 0 && t < 1)) throw Error("theta terms must lie in (0,1)");
    ThetaSeq s(Rule::custom);
    s.table_ = std::move(table);
    if (theta_exact) {
      if (!(sgn(*theta_exact) > 0 && *theta_exact <= 1)) throw Error("theta limit must lie in (0,1]");
      for (std::size_t n = 1; n <= s.table_.size(); ++n)
        if (s.table_[n - 1] > pow(*theta_exact, n)) throw Error("theta_n exceeds theta^n");
    }
    s.theta_exact_ = std::move(theta_exact);
    s.regular_ = s.check_regular(s.table_.size());
    return s;
  }

  Rule rule() const { return rule_; }
  bool regular() const { return regular_; }
  const std::optional<Rational>& theta_exact() const { return theta_exact_; }
  const Rational& ratio() const { return ratio_; }
  const std::vector<Rational>& table() const { return table_; }

  // Largest usable index: K for a custom table, unbounded otherwise.
  std::optional<std::size_t> max_index() const {
    if (rule_ == Rule::custom) return table_.size();
    return std::nullopt;
  }
  bool has_term(std::size_t n) const { return !max_index() || n <= *max_index(); }

  // theta_n for n >= 1, with theta_0 = 1.
  Rational term(std::size_t n) const {
    if (n == 0) return Rational(1);
    switch (rule_) {
      case Rule::geometric: return pow(ratio_, n);
      case Rule::harmonic: return Rational(1, n + 1);
      case Rule::custom:
        if (n > table_.size())
          throw InsufficientPrefix("theta table has " + std::to_string(table_.size()) + " terms, asked for " +
                                   std::to_string(n));
        return table_[n - 1];
    }
    return Rational(0);
  }

  std::vector<Rational> prefix(std::size_t k) const {
    std::vector<Rational> out;
    for (std::size_t n = 1; n <= k; ++n) out.push_back(term(n));
    return out;
  }

  bool is_nonincreasing(std::size_t k) const {
    for (std::size_t n = 2; n <= k; ++n)
      if (term(n) > term(n - 1)) return false;
    return true;
  }

  bool is_supermultiplicative(std::size_t k) const {
    for (std::size_t n = 1; n <= k; ++n)
      for (std::size_t m = 1; n + m <= k; ++m)
        if (term(n + m) < term(n) * term(m)) return false;
    return true;
  }

  bool check_regular(std::size_t k) const { return is_nonincreasing(k) && is_supermultiplicative(k); }

  // Stable identifier; two sequences with equal ids define the same space.
  std::string id() const {
    switch (rule_) {
      case Rule::geometric: return "geometric:" + to_string(ratio_);
      case Rule::harmonic: return "harmonic";
      case Rule::custom: {
        std::string s = "custom:[";
        for (std::size_t i = 0; i < table_.size(); ++i) s += (i ? "," : "") + to_string(table_[i]);
        return s + "]";
      }
    }
    return {};
  }

  bool operator==(const ThetaSeq& o) const { return id() == o.id(); }

 private:
  explicit ThetaSeq(Rule r) : rule_(r) {}
  Rule rule_;
  Rational ratio_{0};
  std::vector<Rational> table_;
  std::optional<Rational> theta_exact_;
  bool regular_ = false;
};

// theta-bar_n = max(theta_n, max_k theta-bar_k theta-bar_{n-k}), n <= k_max.
// Requires a nonincreasing input so that compositions summing to more than n
// never help.
inline ThetaSeq regularize(const ThetaSeq& raw, std::size_t k_max) {
  if (k_max == 0) throw Error("regularize needs K >= 1");
  if (!raw.has_term(k_max)) throw InsufficientPrefix("theta prefix shorter than K");
  if (!raw.is_nonincreasing(k_max)) throw PreconditionViolation("regularize needs a nonincreasing theta prefix");
  std::vector<Rational> bar(k_max + 1);
  bool changed = false;
  for (std::size_t n = 1; n <= k_max; ++n) {
    bar[n] = raw.term(n);
    for (std::size_t k = 1; k < n; ++k) {
      Rational prod = bar[k] * bar[n - k];
      if (prod > bar[n]) bar[n] = prod;
    }
    if (bar[n] != raw.term(n)) changed = true;
  }
  if (!changed && raw.rule() != ThetaSeq::Rule::custom) return raw;
  std::vector<Rational> table(bar.begin() + 1, bar.end());
  std::optional<Rational> theta;
  if (!changed) theta = raw.theta_exact();
  return ThetaSeq::custom(std::move(table), theta);
}

// phi_n = theta_n / theta^n.
inline Rational phi(const ThetaSeq& s, std::size_t n) {
  if (!s.theta_exact()) throw Uncertifiable("phi needs an exact theta limit");
  return s.term(n) / pow(*s.theta_exact(), n);
}

// max over n <= n_max of a lower bound for theta_n^(1/n) on the 2^-bits grid.
inline Rational theta_lower_bound(const ThetaSeq& s, std::size_t n_max, unsigned bits = 30) {
  Rational best(0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    auto exact = exact_root(s.term(n), n);
    Rational lb = exact ? *exact : root_floor_on_grid(s.term(n), n, bits);
    if (lb > best) best = lb;
  }
  return best;
}

struct BoundResult {
  Rational value;          // the supremum (exact, certified by rule)
  Rational range_max;      // max over the scanned range p in [j, p_max]
  std::size_t argmax = 0;  // p attaining range_max
  bool attained = true;    // whether value is attained by some p
  std::string certificate;
};

namespace detail {

inline void require_certified(const ThetaSeq& s) {
  if (!s.theta_exact() || s.rule() == ThetaSeq::Rule::custom)
    throw Uncertifiable("tail of phi cannot be certified for " + s.id());
}

}  // namespace detail

// theta^j sup_{p>=j} phi_p  v  theta_j/theta_1, j >= 1.
inline BoundResult bound_delta_j_v1(const ThetaSeq& s, std::size_t j, std::size_t p_max) {
  detail::require_certified(s);
  if (j == 0) throw Error("first bound needs j >= 1");
  if (p_max < j) p_max = j;
  const Rational theta = *s.theta_exact();
  const Rational tj = pow(theta, j);
  const Rational ratio_term = s.term(j) / s.term(1);
  BoundResult r;
  r.range_max = Rational(-1);
  for (std::size_t p = j; p <= p_max; ++p) {
    Rational v = max(Rational(tj * phi(s, p)), ratio_term);
    if (v > r.range_max) {
      r.range_max = v;
      r.argmax = p;
    }
  }
  // Both certified rules have phi nonincreasing, so the sup over p >= j is phi_j.
  r.value = max(Rational(tj * phi(s, j)), ratio_term);
  r.attained = true;
  r.certificate = s.rule() == ThetaSeq::Rule::geometric ? "phi is identically 1"
                                                        : "phi_p = 1/(p+1) is decreasing; sup attained at p = j";
  return r;
}

// theta^j sup_{p>=j} phi_p / phi_{p-j}, with phi_0 = 1.
inline BoundResult bound_delta_j_v2(const ThetaSeq& s, std::size_t j, std::size_t p_max) {
  detail::require_certified(s);
  if (p_max < j) p_max = j;
  const Rational theta = *s.theta_exact();
  const Rational tj = pow(theta, j);
  BoundResult r;
  r.range_max = Rational(-1);
  for (std::size_t p = j; p <= p_max; ++p) {
    Rational v = tj * phi(s, p) / phi(s, p - j);
    if (v > r.range_max) {
      r.range_max = v;
      r.argmax = p;
    }
  }
  if (s.rule() == ThetaSeq::Rule::geometric || j == 0) {
    r.value = tj;
    r.attained = true;
    r.certificate = j == 0 ? "empty product" : "phi is identically 1";
  } else {
    // (p-j+1)/(p+1) increases to 1 and never reaches it.
    r.value = tj;
    r.attained = false;
    r.certificate = "phi_p/phi_{p-j} = (p-j+1)/(p+1) increases to 1";
  }
  return r;
}

// Least n <= p_max with sup_{p>=n} phi_p < theta_1 / (2 lambda).
inline std::size_t distortion_target_n(const ThetaSeq& s, const Rational& lambda, std::size_t p_max) {
  if (sgn(lambda) <= 0) throw Error("lambda must be positive");
  detail::require_certified(s);
  if (s.rule() != ThetaSeq::Rule::harmonic)
    throw Uncertifiable("phi does not tend to 0 for " + s.id());
  const Rational target = s.term(1) / (2 * lambda);
  for (std::size_t n = 1; n <= p_max; ++n)
    if (phi(s, n) < target) return n;  // phi decreasing: sup_{p>=n} phi_p = phi_n
  throw BudgetExceeded("no n <= " + std::to_string(p_max) + " meets the distortion target");
}

}  // namespace tsl
