#pragma once

#include "tsl/averages.hpp"
#include "tsl/corenorm.hpp"
#include "tsl/distort.hpp"
#include "tsl/estimates.hpp"
#include "tsl/finvec.hpp"
#include "tsl/rational.hpp"
#include "tsl/schreier.hpp"
#include "tsl/thetaseq.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

// JSON and CSV forms of the library types. Rationals are always written as
// "p/q" strings; integers are accepted on input.
namespace tsl::io {

using json = nlohmann::ordered_json;

inline json rational_json(const Rational& r) { return to_string(r); }

inline Rational rational_from(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(Integer(j.get<long>()));
  throw Error("expected a rational as \"p/q\" or an integer, got " + j.dump());
}

inline json interval_json(const Interval& f) { return json::array({f.lo, f.hi}); }

inline Interval interval_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error("interval must be [lo, hi]");
  return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
}

// ---- vectors

inline json finvec_json(const FinVec& x) {
  json entries = json::array();
  for (auto& [i, c] : x.entries()) entries.push_back(json::array({i, to_string(c)}));
  return json{{"entries", entries}};
}

// Accepts {"entries": [...]} or the bare entry list.
inline FinVec finvec_from(const json& j) {
  const json& list = j.is_object() ? j.at("entries") : j;
  if (!list.is_array()) throw Error("vector must be a list of [index, coefficient] pairs");
  std::vector<FinVec::Entry> entries;
  for (auto& e : list) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer())
      throw Error("bad vector entry " + e.dump());
    entries.emplace_back(e[0].get<std::int64_t>(), rational_from(e[1]));
  }
  return FinVec(std::move(entries));
}

inline FinVec parse_finvec(const std::string& text) {
  try {
    return finvec_from(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(std::string("cannot parse vector: ") + e.what());
  }
}

// ---- theta sequences

inline json thetaseq_json(const ThetaSeq& s, std::size_t prefix_len = 8) {
  json j;
  json params = json::object();
  std::size_t len = prefix_len;
  switch (s.rule()) {
    case ThetaSeq::Rule::geometric:
      j["rule"] = "geometric";
      params["ratio"] = rational_json(s.ratio());
      break;
    case ThetaSeq::Rule::harmonic: j["rule"] = "harmonic"; break;
    case ThetaSeq::Rule::custom:
      j["rule"] = "custom";
      len = s.table().size();
      break;
  }
  j["params"] = params;
  json prefix = json::array();
  for (auto& t : s.prefix(len)) prefix.push_back(rational_json(t));
  j["prefix"] = prefix;
  j["theta_exact"] = s.theta_exact() ? json(rational_json(*s.theta_exact())) : json(nullptr);
  return j;
}

inline ThetaSeq thetaseq_from(const json& j) {
  const std::string rule = j.at("rule").get<std::string>();
  if (rule == "geometric") return ThetaSeq::geometric(rational_from(j.at("params").at("ratio")));
  if (rule == "harmonic") return ThetaSeq::harmonic();
  if (rule == "custom") {
    std::vector<Rational> table;
    for (auto& t : j.at("prefix")) table.push_back(rational_from(t));
    std::optional<Rational> limit;
    if (j.contains("theta_exact") && !j["theta_exact"].is_null()) limit = rational_from(j["theta_exact"]);
    return ThetaSeq::custom(std::move(table), limit);
  }
  throw Error("unknown theta rule '" + rule + "'");
}

// Named spaces: tsirelson = T(2^-n, S_n), tsirelson-s1 = T(1/2, S_1),
// harmonic = T(1/(n+1), S_n), geometric:p/q, custom:t1,t2,...; anything
// else is read as a JSON file.
inline ThetaSeq parse_space(const std::string& name) {
  if (name == "tsirelson") return ThetaSeq::geometric(make_rational(1, 2));
  if (name == "tsirelson-s1") return ThetaSeq::custom({make_rational(1, 2)}, make_rational(1, 2));
  if (name == "harmonic") return ThetaSeq::harmonic();
  if (name.rfind("geometric:", 0) == 0) return ThetaSeq::geometric(parse_rational(name.substr(10)));
  if (name.rfind("custom:", 0) == 0) {
    std::vector<Rational> table;
    std::stringstream ss(name.substr(7));
    std::string tok;
    while (std::getline(ss, tok, ',')) table.push_back(parse_rational(tok));
    return ThetaSeq::custom(std::move(table));
  }
  std::ifstream in(name);
  if (!in) throw Error("unknown space '" + name + "' (not a name and not a readable file)");
  try {
    return thetaseq_from(json::parse(in));
  } catch (const json::exception& e) {
    throw Error("cannot parse space file " + name + ": " + e.what());
  }
}

// ---- witnesses

inline json witness_json(const Witness& w) {
  json j{{"range", interval_json(w.range)}, {"q", w.q}, {"value", rational_json(w.value)}};
  json kids = json::array();
  for (auto& c : w.children) kids.push_back(witness_json(c));
  j["children"] = kids;
  return j;
}

inline Witness witness_from(const json& j) {
  Witness w;
  w.range = interval_from(j.at("range"));
  w.q = j.at("q").get<unsigned>();
  w.value = rational_from(j.at("value"));
  for (auto& c : j.at("children")) w.children.push_back(witness_from(c));
  return w;
}

// ---- averaging trees

inline json tree_json(const AvgTree& t) {
  json j{{"M", t.M},
         {"N", t.N},
         {"refined", t.refined},
         {"base", t.base_id},
         {"theta1", rational_json(t.theta1)}};
  json levels = json::array();
  for (unsigned lv = 0; lv <= t.M; ++lv) {
    json nodes = json::array();
    for (std::size_t i = 1; i <= t.count(lv); ++i) {
      const AvgNode& n = t.node(lv, i);
      json node{{"index", i}, {"range", interval_json(n.ran())}, {"max_coord", n.max_coord}};
      if (lv == 0) {
        node["base_index"] = n.base_index;
      } else {
        node["children"] = json::array({n.first_child, n.last_child});
        node["k"] = n.k();
        node["eps"] = rational_json(n.eps);
        node["prev_max_coord"] = t.max_coord(lv, i - 1);
      }
      node["min_base"] = n.min_base;
      node["vec"] = finvec_json(n.vec)["entries"];
      nodes.push_back(node);
    }
    levels.push_back(json{{"level", lv}, {"nodes", nodes}});
  }
  j["levels"] = levels;
  return j;
}

// Reads a tree and checks that it is internally consistent: every node above
// level 0 is the average of a contiguous run of nodes one level down, runs
// cover the level below in order, and recorded ranges match the vectors.
inline AvgTree tree_from(const json& j) {
  AvgTree t;
  t.M = j.at("M").get<unsigned>();
  t.N = j.at("N").get<std::int64_t>();
  t.refined = j.value("refined", false);
  t.base_id = j.value("base", std::string("unknown"));
  t.theta1 = j.contains("theta1") ? rational_from(j["theta1"]) : Rational(0);
  const json& levels = j.at("levels");
  if (levels.size() != t.M + 1) throw Error("tree has " + std::to_string(levels.size()) + " levels, expected M+1");
  for (unsigned lv = 0; lv <= t.M; ++lv) {
    std::vector<AvgNode> nodes;
    for (auto& nj : levels[lv].at("nodes")) {
      AvgNode n;
      n.vec = finvec_from(nj.at("vec"));
      if (n.vec.empty()) throw Error("tree node with empty vector");
      n.max_coord = n.vec.max_index();
      if (nj.contains("max_coord") && nj["max_coord"].get<std::int64_t>() != n.max_coord)
        throw Error("recorded max_coord disagrees with the node vector");
      if (nj.contains("range") && interval_from(nj["range"]) != n.ran())
        throw Error("recorded range disagrees with the node vector");
      if (lv == 0) {
        n.base_index = nj.at("base_index").get<std::size_t>();
        n.min_base = n.base_index;
      } else {
        auto c = nj.at("children");
        n.first_child = c.at(0).get<std::size_t>();
        n.last_child = c.at(1).get<std::size_t>();
        n.eps = rational_from(nj.at("eps"));
      }
      nodes.push_back(std::move(n));
    }
    t.levels.push_back(std::move(nodes));
  }
  if (t.levels[t.M].size() != 1) throw Error("the top level must hold exactly one node");
  for (unsigned lv = 1; lv <= t.M; ++lv) {
    std::size_t expect = 1;
    for (auto& n : t.levels[lv]) {
      if (n.first_child != expect || n.last_child < n.first_child || n.last_child > t.levels[lv - 1].size())
        throw Error("children of level " + std::to_string(lv) + " do not cover level " + std::to_string(lv - 1) +
                    " in order");
      expect = n.last_child + 1;
      FinVec sum;
      std::size_t mb = t.levels[lv - 1][n.first_child - 1].min_base;
      for (std::size_t s = n.first_child; s <= n.last_child; ++s) {
        sum = sum + t.levels[lv - 1][s - 1].vec;
        mb = std::min(mb, t.levels[lv - 1][s - 1].min_base);
      }
      if (!(sum.scaled(Rational(Rational(1) / static_cast<long>(n.k()))) == n.vec))
        throw Error("node vector is not the average of its children");
      n.min_base = mb;
    }
    if (expect != t.levels[lv - 1].size() + 1) throw Error("level " + std::to_string(lv - 1) + " has unused nodes");
  }
  return t;
}

// ---- reports

inline json check_json(const InequalityCheck& c) {
  return json{{"name", c.name},         {"params", c.params},
              {"lhs", to_string(c.lhs)}, {"rhs", to_string(c.rhs)},
              {"slack", to_string(c.slack())}, {"status", to_string(c.status)},
              {"certified", c.certified}};
}

inline json estimate_report_json(const EstimateReport& r) {
  json rows = json::array();
  for (auto& c : r.rows) rows.push_back(check_json(c));
  return json{{"which", r.which},
              {"holds", r.count(CheckStatus::holds)},
              {"fails", r.count(CheckStatus::fails)},
              {"inconclusive", r.count(CheckStatus::inconclusive)},
              {"vacuous", r.count(CheckStatus::vacuous)},
              {"rows", rows}};
}

inline json average_report_json(const AverageReport& r) {
  json nodes = json::array();
  for (auto& n : r.nodes)
    nodes.push_back(json{{"level", n.node.level},
                         {"index", n.node.index},
                         {"worst_loss", to_string(n.worst_loss)},
                         {"eps", to_string(n.eps)}});
  return json{{"weights_ok", r.weights_ok},
              {"admissible_ok", r.admissible_ok},
              {"shrink_ok", r.shrink_ok},
              {"weight_sum", to_string(r.weight_sum)},
              {"eps_total", to_string(r.eps_total)},
              {"loss_total", to_string(r.loss_total)},
              {"systems_sampled", r.systems_sampled},
              {"nodes", nodes},
              {"failures", r.failures}};
}

inline json distortion_report_json(const DistortionReport& r) {
  json pairs = json::array();
  for (auto& p : r.pairs)
    pairs.push_back(json{{"subspace", p.subspace},
                         {"y_kind", p.y_kind},
                         {"z_kind", p.z_kind},
                         {"y", finvec_json(p.y)["entries"]},
                         {"z", finvec_json(p.z)["entries"]},
                         {"y_value", to_string(p.y_value)},
                         {"z_value", to_string(p.z_value)},
                         {"ratio", to_string(p.ratio)},
                         {"exceeds_lambda", p.ratio > r.lambda}});
  return json{{"lambda", to_string(r.lambda)},
              {"n", r.n},
              {"a", to_string(r.a)},
              {"best_ratio", to_string(r.best_ratio)},
              {"min_ratio", to_string(r.min_ratio)},
              {"subspaces_reached", r.subspaces_reached},
              {"subspaces", r.pairs.size()},
              {"status", r.reached ? "reached" : "inconclusive"},
              {"note", r.note},
              {"pairs", pairs}};
}

// ---- CSV

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << csv_field(fields[i]);
  os << '\n';
}

inline void write_estimate_csv(std::ostream& os, const std::vector<InequalityCheck>& rows) {
  write_csv_row(os, {"name", "params", "lhs", "rhs", "slack", "status", "certified"});
  for (auto& c : rows)
    write_csv_row(os, {c.name, c.params, to_string(c.lhs), to_string(c.rhs), to_string(c.slack()),
                       to_string(c.status), c.certified ? "true" : "false"});
}

// One row per sampled subspace. "certified" means the ratio is an exact
// lower bound for the distortion on that subspace that exceeds lambda.
inline void write_distortion_csv(std::ostream& os, const DistortionReport& r) {
  write_csv_row(os, {"subspace", "n", "ratio", "certified"});
  for (auto& p : r.pairs)
    write_csv_row(os, {p.subspace, std::to_string(r.n), to_string(p.ratio), p.ratio > r.lambda ? "true" : "false"});
}

}  // namespace tsl::io
