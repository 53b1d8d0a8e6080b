#pragma once

#include "tsl/averages.hpp"
#include "tsl/corenorm.hpp"
#include "tsl/estimates.hpp"
#include "tsl/random.hpp"
#include "tsl/rational.hpp"
#include "tsl/thetaseq.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace tsl {

// |x| = (1/n) sum_{j<n} |x|_j with |x|_0 = ||x|| and
// |x|_j = a^j sup { sum ||E_i x|| : (E_i) j-admissible }, where a^n <= theta_n.
class DistortionNorm {
 public:
  DistortionNorm(std::shared_ptr<const NormEvaluator> ev, std::size_t n, unsigned bits = 20)
      : ev_(std::move(ev)), n_(n) {
    if (n_ == 0) throw Error("distortion norm needs n >= 1");
    const Rational tn = ev_->space().term(n_);
    auto exact = exact_root(tn, n_);
    a_ = exact ? *exact : root_floor_on_grid(tn, n_, bits);
    if (pow(a_, n_) > tn) throw Error("internal: a^n exceeds theta_n");
  }

  DistortionNorm(const ThetaSeq& space, std::size_t n, unsigned bits = 20)
      : DistortionNorm(std::make_shared<const NormEvaluator>(space), n, bits) {}

  std::size_t n() const { return n_; }
  const Rational& a() const { return a_; }
  const NormEvaluator& evaluator() const { return *ev_; }

  Rational eval_j(const FinVec& x, std::size_t j) const {
    if (x.empty()) return Rational(0);
    if (j == 0) return ev_->norm(x);
    return pow(a_, j) * ev_->analyze(x)->admissible_sum(0, x.size() - 1, j);
  }

  Rational eval(const FinVec& x) const {
    Rational s(0);
    for (std::size_t j = 0; j < n_; ++j) s += eval_j(x, j);
    return s / static_cast<long>(n_);
  }

  // Constants c, C with c ||x|| <= |x| <= C ||x||.
  Rational lower_constant() const {
    Rational s(0);
    for (std::size_t j = 0; j < n_; ++j) s += pow(a_, j);
    return s / static_cast<long>(n_);
  }
  Rational upper_constant() const {
    Rational s(0);
    for (std::size_t j = 0; j < n_; ++j) s += pow(a_, j) / ev_->space().term(j);
    return s / static_cast<long>(n_);
  }

 private:
  std::shared_ptr<const NormEvaluator> ev_;
  std::size_t n_;
  Rational a_;
};

struct Delta1Sample {
  std::vector<FinVec> blocks;
  Rational lhs;  // |sum x_i|
  Rational rhs;  // a sum |x_i|
  Rational slack() const { return lhs - rhs; }
};

struct Delta1Report {
  std::vector<Delta1Sample> samples;
  std::size_t passed = 0;
  bool ok() const { return passed == samples.size(); }
};

// Seeded families e_k <= x_1 < ... < x_k with total support <= max_support,
// checking |sum x_i| >= a sum |x_i|.
inline Delta1Report delta1_check(const DistortionNorm& dn, std::size_t samples, std::uint64_t seed = 1,
                                 std::int64_t max_support = 10) {
  Delta1Report rep;
  Rng rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::int64_t k = rng.uniform(1, 4);
    std::int64_t start = k + rng.uniform(0, 2);
    std::int64_t budget = max_support;
    Delta1Sample smp;
    for (std::int64_t i = 0; i < k && budget > 0; ++i) {
      const std::int64_t room = std::min<std::int64_t>(3, budget - (k - i - 1));
      const std::int64_t len = rng.uniform(1, std::max<std::int64_t>(1, room));
      FinVec b = rng.vector_in(start, start + len - 1, static_cast<std::size_t>(len));
      budget -= static_cast<std::int64_t>(b.size());
      start = b.max_index() + 1 + rng.uniform(0, 1);
      smp.blocks.push_back(std::move(b));
    }
    FinVec sum;
    Rational parts(0);
    for (auto& b : smp.blocks) {
      sum = sum + b;
      parts += dn.eval(b);
    }
    smp.lhs = dn.eval(sum);
    smp.rhs = dn.a() * parts;
    if (smp.lhs >= smp.rhs) ++rep.passed;
    rep.samples.push_back(std::move(smp));
  }
  return rep;
}

struct EnvelopeCheck {
  Rational lower, value, upper;
  bool ok() const { return lower <= value && value <= upper; }
};

inline EnvelopeCheck envelope_check(const DistortionNorm& dn, const FinVec& x) {
  const Rational nx = dn.evaluator().norm(x);
  return {dn.lower_constant() * nx, dn.eval(x), dn.upper_constant() * nx};
}

struct DistortionPair {
  std::string subspace;
  std::string y_kind;
  std::string z_kind;
  FinVec y, z;  // both of norm 1
  Rational y_value, z_value;  // |y|, |z|
  Rational ratio;
};

struct DistortionReport {
  Rational lambda;
  std::size_t n = 0;
  Rational a;
  std::vector<DistortionPair> pairs;  // best pair per subspace
  Rational best_ratio{0};             // max over sampled subspaces
  Rational min_ratio{0};              // min over sampled subspaces
  std::size_t subspaces_reached = 0;  // subspaces whose ratio exceeds lambda
  bool reached = false;               // every sampled subspace exceeds lambda
  std::string note;
};

struct ExperimentConfig {
  std::size_t p_max = 200;       // search range for n
  std::size_t subspaces = 2;     // sampled unit-vector subsequences besides (e_i)
  std::uint64_t seed = 1;
  unsigned max_depth = 2;        // deepest average tried for y and z
  std::size_t max_support = 150;
};

// Lower bounds for the distortion of the witness norm on a few block subspaces
// spanned by subsequences of the unit vectors. Each subspace gets y from
// normalized averages of depth 1..max_depth and z from a single normalized
// basis vector or a flat-vector candidate; the best |y|/|z| per subspace is a
// certified lower bound for that subspace only.
inline DistortionReport distortion_experiment(const ThetaSeq& space, const Rational& lambda,
                                              const ExperimentConfig& cfg = {}) {
  DistortionReport rep;
  rep.lambda = lambda;
  rep.n = distortion_target_n(space, lambda, cfg.p_max);
  auto ev = std::make_shared<const NormEvaluator>(space);
  DistortionNorm dn(ev, rep.n);
  rep.a = dn.a();

  std::vector<BlockSequence> subs{BlockSequence::unit_vectors()};
  Rng rng(cfg.seed);
  for (std::size_t s = 0; s < cfg.subspaces; ++s) {
    std::int64_t first = rng.uniform(1, 4), step = rng.uniform(2, 3);
    subs.push_back(BlockSequence::unit_subsequence(schreier::IndexSequence::arithmetic(first, step)));
  }

  AverageBudget ab;
  ab.max_support = cfg.max_support;
  for (auto& base : subs) {
    auto normalize = [&](const FinVec& v) { return v.scaled(Rational(1 / ev->norm(v))); };
    std::vector<std::pair<std::string, FinVec>> ys, zs;
    zs.emplace_back("basis vector", normalize(base.at(1)));
    for (unsigned d = 1; d <= cfg.max_depth; ++d) {
      for (const Rational& e : {make_rational(1, 2), make_rational(9, 10)}) {
        try {
          AvgTree t = construct_average(base, d, 1, EpsSchedule::constant(e), false, Rational(0), ab);
          ys.emplace_back("average depth " + std::to_string(d) + " eps " + to_string(e), normalize(t.root().vec));
        } catch (const BudgetExceeded&) {
        }
      }
    }
    FlatSearchBudget fb;
    fb.max_depth = cfg.max_depth;
    fb.max_support = cfg.max_support;
    FlatReport flat = find_flat_vector(*ev, rep.n, 1, Rational(1), fb, base);
    if (!flat.y.empty()) zs.emplace_back("flat candidate depth " + std::to_string(flat.depth), flat.y);
    if (ys.empty()) continue;

    DistortionPair best;
    best.ratio = Rational(-1);
    for (auto& [yk, y] : ys) {
      Rational yv = dn.eval(y);
      for (auto& [zk, z] : zs) {
        Rational zv = dn.eval(z);
        Rational r = yv / zv;
        if (r > best.ratio) best = {base.id(), yk, zk, y, z, yv, zv, r};
      }
    }
    rep.best_ratio = max(rep.best_ratio, best.ratio);
    rep.min_ratio = rep.pairs.empty() ? best.ratio : min(rep.min_ratio, best.ratio);
    if (best.ratio > lambda) ++rep.subspaces_reached;
    rep.pairs.push_back(std::move(best));
  }
  rep.reached = !rep.pairs.empty() && rep.subspaces_reached == rep.pairs.size();
  rep.note = rep.reached ? "every sampled subspace has a pair with ratio above lambda"
                         : "inconclusive: " + std::to_string(rep.subspaces_reached) + " of " +
                               std::to_string(rep.pairs.size()) +
                               " sampled subspaces exceed lambda at this budget; no extrapolation is made";
  return rep;
}

}  // namespace tsl
