#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tsl {

using Rational = mpq_class;
using Integer = mpz_class;

// Error hierarchy shared by every module.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientPrefix : Error {
  using Error::Error;
};
struct BudgetExceeded : Error {
  using Error::Error;
};
struct Uncertifiable : Error {
  using Error::Error;
};
struct PreconditionViolation : Error {
  using Error::Error;
};

inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw Error("zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Accepts "p/q", "p", and finite decimals such as "0.9" or "-1.25".
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
  if (s.empty()) throw Error("empty rational literal");
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    if (s.find('/') != std::string::npos) throw Error("bad rational literal: " + s);
    std::string frac = s.substr(dot + 1);
    std::string whole = s.substr(0, dot);
    bool neg = !whole.empty() && whole[0] == '-';
    if (neg || (!whole.empty() && whole[0] == '+')) whole.erase(whole.begin());
    if (whole.empty()) whole = "0";
    for (char c : whole + frac)
      if (c < '0' || c > '9') throw Error("bad rational literal: " + s);
    Integer num(whole + frac, 10);
    Integer den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    Rational r(num, den);
    r.canonicalize();
    return neg ? Rational(-r) : r;
  }
  Rational r;
  if (r.set_str(s, 10) != 0) throw Error("bad rational literal: " + s);
  if (r.get_den() == 0) throw Error("zero denominator: " + s);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

inline Rational pow(const Rational& base, unsigned long e) {
  Rational out(1);
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), e);
  out.canonicalize();
  return out;
}

inline Integer floor(const Rational& r) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }

// Exact n-th root of a nonnegative rational, when one exists.
inline std::optional<Rational> exact_root(const Rational& v, unsigned long n) {
  if (n == 0 || sgn(v) < 0) return std::nullopt;
  Integer num, den;
  bool num_exact = mpz_root(num.get_mpz_t(), v.get_num_mpz_t(), n) != 0;
  bool den_exact = mpz_root(den.get_mpz_t(), v.get_den_mpz_t(), n) != 0;
  if (!num_exact || !den_exact) return std::nullopt;
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Largest k / 2^bits with (k / 2^bits)^n <= v, for v >= 0.
inline Rational root_floor_on_grid(const Rational& v, unsigned long n, unsigned long bits) {
  if (n == 0) throw Error("root of order zero");
  if (sgn(v) < 0) throw Error("root of a negative rational");
  Integer scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 2, bits * n);
  Rational scaled = v * Rational(scale);
  Integer fl = floor(scaled);
  Integer k;
  mpz_root(k.get_mpz_t(), fl.get_mpz_t(), n);
  Integer den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, bits);
  Rational r(k, den);
  r.canonicalize();
  return r;
}

inline double to_double(const Rational& r) { return r.get_d(); }

}  // namespace tsl
