#pragma once

#include "tsl/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tsl {

// Finitely supported vector on positive indices, stored sorted with no zeros.
class FinVec {
 public:
  using Entry = std::pair<std::int64_t, Rational>;

  FinVec() = default;

  // Zero coefficients are dropped; repeated indices are an error.
  explicit FinVec(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    for (auto& e : entries) {
      if (e.first < 1) throw Error("FinVec index must be >= 1");
      if (!entries_.empty() && entries_.back().first == e.first)
        throw Error("FinVec index repeated: " + std::to_string(e.first));
      if (sgn(e.second) != 0) entries_.push_back(std::move(e));
    }
  }

  static FinVec unit(std::int64_t i) { return FinVec({{i, Rational(1)}}); }

  // Sum of unit vectors at the given indices.
  static FinVec indicator(const std::vector<std::int64_t>& idx) {
    std::vector<Entry> e;
    for (auto i : idx) e.emplace_back(i, Rational(1));
    return FinVec(std::move(e));
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::int64_t min_index() const { return entries_.empty() ? 0 : entries_.front().first; }
  std::int64_t max_index() const { return entries_.empty() ? 0 : entries_.back().first; }

  std::vector<std::int64_t> support() const {
    std::vector<std::int64_t> s;
    s.reserve(entries_.size());
    for (auto& e : entries_) s.push_back(e.first);
    return s;
  }

  Rational at(std::int64_t i) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                               [](const Entry& e, std::int64_t v) { return e.first < v; });
    if (it != entries_.end() && it->first == i) return it->second;
    return Rational(0);
  }

  Rational sup_norm() const {
    Rational m(0);
    for (auto& e : entries_) m = max(m, Rational(abs(e.second)));
    return m;
  }

  Rational l1_norm() const {
    Rational s(0);
    for (auto& e : entries_) s += abs(e.second);
    return s;
  }

  // Restriction to the integer interval [lo, hi].
  FinVec restrict(std::int64_t lo, std::int64_t hi) const {
    FinVec out;
    for (auto& e : entries_)
      if (e.first >= lo && e.first <= hi) out.entries_.push_back(e);
    return out;
  }

  FinVec scaled(const Rational& c) const {
    if (sgn(c) == 0) return FinVec();
    FinVec out;
    out.entries_.reserve(entries_.size());
    for (auto& e : entries_) out.entries_.emplace_back(e.first, Rational(e.second * c));
    return out;
  }

  FinVec abs_values() const {
    FinVec out = *this;
    for (auto& e : out.entries_) e.second = abs(e.second);
    return out;
  }

  FinVec operator+(const FinVec& o) const {
    std::vector<Entry> merged;
    std::size_t a = 0, b = 0;
    while (a < entries_.size() || b < o.entries_.size()) {
      if (b == o.entries_.size() || (a < entries_.size() && entries_[a].first < o.entries_[b].first)) {
        merged.push_back(entries_[a++]);
      } else if (a == entries_.size() || o.entries_[b].first < entries_[a].first) {
        merged.push_back(o.entries_[b++]);
      } else {
        Rational s = entries_[a].second + o.entries_[b].second;
        if (sgn(s) != 0) merged.emplace_back(entries_[a].first, s);
        ++a;
        ++b;
      }
    }
    FinVec out;
    out.entries_ = std::move(merged);
    return out;
  }

  bool operator==(const FinVec& o) const { return entries_ == o.entries_; }

  // True when max supp(*this) < min supp(o); empty vectors compare vacuously.
  bool precedes(const FinVec& o) const {
    return empty() || o.empty() || max_index() < o.min_index();
  }

  std::string to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (i) s += ",";
      s += "[" + std::to_string(entries_[i].first) + "," + tsl::to_string(entries_[i].second) + "]";
    }
    return s + "]";
  }

 private:
  std::vector<Entry> entries_;
};

}  // namespace tsl
