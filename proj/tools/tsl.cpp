// tsl: exact norms, Schreier families, averages and distortion experiments
// for mixed Tsirelson spaces.
//
// Exit codes: 0 success, 1 a check failed, 2 bad input, 3 partial result
// (budget or time guard hit before the run completed).

#include "suites.hpp"

#include "tsl/averages.hpp"
#include "tsl/corenorm.hpp"
#include "tsl/distort.hpp"
#include "tsl/estimates.hpp"
#include "tsl/json_io.hpp"
#include "tsl/schreier.hpp"
#include "tsl/thetaseq.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace tsl;
using io::json;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kBadInput = 2;
constexpr int kPartial = 3;

struct Globals {
  std::string space = "tsirelson";
  std::uint64_t seed = 1;
  std::string out;
  std::string cache;
  std::optional<long> budget_ms;
  std::size_t budget_support = 4000;
  std::size_t budget_k = 20000;
};

std::optional<long> env_budget_ms() {
  const char* v = std::getenv("TSL_BUDGET_MS");
  if (!v || !*v) return std::nullopt;
  try {
    return std::stol(v);
  } catch (const std::exception&) {
    throw Error(std::string("TSL_BUDGET_MS is not an integer: ") + v);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Inline JSON when the text starts like JSON, otherwise a file path.
FinVec load_vector(const std::string& text) {
  auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) return io::parse_finvec(text);
  return io::parse_finvec(read_file(text));
}

std::string csv_path(const std::string& out, const std::string& suffix = "") {
  std::string base = out;
  if (base.size() > 5 && base.substr(base.size() - 5) == ".json") base.resize(base.size() - 5);
  return base + suffix + ".csv";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// 64-bit FNV-1a; stable across platforms, used to tag cache entries.
std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

// Memo cache persisted as {"spaces": {id: {"hash": ..., "values": {...}}}};
// an entry whose hash does not match the space definition is ignored and replaced.
class CacheFile {
 public:
  CacheFile(std::string path, const ThetaSeq& space)
      : path_(std::move(path)), id_(space.id()), hash_(fnv1a(io::thetaseq_json(space).dump())) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (!in) return;
    try {
      doc_ = json::parse(in);
    } catch (const json::exception&) {
      std::cerr << "warning: ignoring unreadable cache " << path_ << "\n";
      doc_ = json::object();
    }
  }

  void load_into(NormEvaluator& ev) const {
    if (!doc_.contains("spaces") || !doc_["spaces"].contains(id_)) return;
    const json& e = doc_["spaces"][id_];
    if (e.value("hash", std::string()) != hash_) return;
    std::map<std::string, Rational> vals;
    for (auto& [k, v] : e.at("values").items()) vals.emplace(k, io::rational_from(v));
    ev.import_values(vals);
  }

  void save_from(const NormEvaluator& ev) {
    if (path_.empty()) return;
    json values = json::object();
    for (auto& [k, v] : ev.exported_values()) values[k] = to_string(v);
    if (!doc_.is_object()) doc_ = json::object();
    doc_["spaces"][id_] = json{{"hash", hash_}, {"values", values}};
    write_json(path_, doc_);
  }

 private:
  std::string path_, id_, hash_;
  json doc_ = json::object();
};

// "N=3,p=0" -> ||x||_{N,p}; "p=2" -> ||x||_p; "SN=1,p=0" -> ||x||_{S_N,p}.
Rational aux_norm(const NormEvaluator& ev, const FinVec& x, const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error("auxiliary norm needs key=value pairs: " + text);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  if (!kv.count("p")) throw Error("auxiliary norm needs p: " + text);
  const std::size_t p = std::stoul(kv["p"]);
  if (kv.count("N") && kv.count("SN")) throw Error("give N or SN, not both: " + text);
  if (kv.count("N")) return ev.norm_Np(x, std::stoll(kv["N"]), p);
  if (kv.count("SN")) return ev.norm_SNp(x, std::stoul(kv["SN"]), p);
  if (kv.size() != 1) throw Error("unknown key in " + text);
  return ev.norm_p(x, p);
}

AverageBudget average_budget(const Globals& g) {
  AverageBudget b;
  b.max_support = g.budget_support;
  b.max_k = g.budget_k;
  return b;
}

BlockSequence parse_base(const std::string& text) {
  if (text == "units") return BlockSequence::unit_vectors();
  if (text.rfind("random:", 0) == 0) return BlockSequence::random_blocks(std::stoull(text.substr(7)), 3, 1);
  if (text.rfind("subsequence:", 0) == 0) return BlockSequence::unit_subsequence(cli::parse_sequence(text.substr(12)));
  throw Error("unknown base '" + text + "' (units, random:<seed>, subsequence:<sequence>)");
}

int cmd_norm(const Globals& g, const std::string& vec, const std::vector<std::string>& aux, bool witness) {
  const ThetaSeq space = io::parse_space(g.space);
  const FinVec x = load_vector(vec);
  NormEvaluator ev(space);
  CacheFile cache(g.cache, space);
  cache.load_into(ev);
  json report{{"space", io::thetaseq_json(space)}, {"vec", io::finvec_json(x)}};
  const Rational n = ev.norm(x);
  report["norm"] = to_string(n);
  if (aux.empty()) std::cout << to_string(n) << "\n";
  json aux_j = json::object();
  for (auto& a : aux) {
    Rational v = aux_norm(ev, x, a);
    aux_j[a] = to_string(v);
    std::cout << to_string(v) << "\n";
  }
  report["aux"] = aux_j;
  if (witness) {
    json w = x.empty() ? json(nullptr) : io::witness_json(ev.witness(x));
    report["witness"] = w;
    std::cout << w.dump(2) << "\n";
  }
  cache.save_from(ev);
  if (!g.out.empty()) write_json(g.out, report);
  return kOk;
}

int cmd_schreier(const Globals& g, const std::string& set_text, const std::string& alpha,
                 const std::string& sequence) {
  schreier::IndexSet f;
  std::string t = set_text;
  if (!t.empty() && t.front() == '[') {
    f = json::parse(t).get<schreier::IndexSet>();
  } else {
    std::stringstream ss(t);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(std::stoll(tok));
  }
  if (!schreier::is_valid_index_set(f)) throw Error("set must be strictly increasing positive integers");
  const schreier::OrdinalIndex a = alpha == "omega" ? schreier::OrdinalIndex::omega_index()
                                                    : schreier::OrdinalIndex::finite(std::stoul(alpha));
  bool member;
  if (sequence.empty()) {
    member = schreier::is_member(f, a);
  } else {
    member = schreier::is_member_of_N(f, a, cli::parse_sequence(sequence));
  }
  std::cout << (member ? "true" : "false") << "\n";
  if (!g.out.empty())
    write_json(g.out, json{{"set", f}, {"alpha", a.to_string()}, {"N", sequence.empty() ? "identity" : sequence},
                           {"member", member}});
  return kOk;
}

int cmd_regularize(const Globals& g, std::size_t k) {
  const ThetaSeq raw = io::parse_space(g.space);
  const ThetaSeq reg = regularize(raw, k);
  std::cout << "n,theta,regularized\n";
  for (std::size_t n = 1; n <= k; ++n) std::cout << n << "," << to_string(raw.term(n)) << "," << to_string(reg.term(n)) << "\n";
  if (!g.out.empty()) write_json(g.out, json{{"input", io::thetaseq_json(raw)}, {"regularized", io::thetaseq_json(reg)}});
  return kOk;
}

int cmd_bounds(const Globals& g, std::size_t j_max, std::size_t p_max) {
  const ThetaSeq space = io::parse_space(g.space);
  std::ostringstream csv;
  io::write_csv_row(csv, {"j", "theta_j", "bound_v1", "bound_v2", "v2_attained", "v2_range_max", "v2_argmax",
                          "certificate"});
  json rows = json::array();
  for (std::size_t j = 1; j <= j_max; ++j) {
    auto v1 = bound_delta_j_v1(space, j, p_max);
    auto v2 = bound_delta_j_v2(space, j, p_max);
    io::write_csv_row(csv, {std::to_string(j), to_string(space.term(j)), to_string(v1.value), to_string(v2.value),
                            v2.attained ? "true" : "false", to_string(v2.range_max), std::to_string(v2.argmax),
                            v2.certificate});
    rows.push_back(json{{"j", j},
                        {"theta_j", to_string(space.term(j))},
                        {"bound_v1", to_string(v1.value)},
                        {"bound_v2", to_string(v2.value)},
                        {"v2_attained", v2.attained},
                        {"v2_range_max", to_string(v2.range_max)},
                        {"v2_argmax", v2.argmax},
                        {"certificate", v2.certificate}});
  }
  std::cout << csv.str();
  if (!g.out.empty()) {
    write_json(g.out, json{{"space", io::thetaseq_json(space)}, {"p_max", p_max}, {"rows", rows}});
    write_text(csv_path(g.out), csv.str());
  }
  return kOk;
}

int cmd_average(const Globals& g, unsigned m, std::int64_t big_n, const std::string& eps, bool refine,
                const std::string& base) {
  const ThetaSeq space = io::parse_space(g.space);
  AvgTree t = construct_average(parse_base(base), m, big_n, EpsSchedule::constant(parse_rational(eps)), refine,
                                refine ? space.term(1) : Rational(0), average_budget(g));
  const json j = io::tree_json(t);
  if (g.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(g.out, j);
    for (unsigned lv = 1; lv <= t.M; ++lv)
      for (std::size_t i = 1; i <= t.count(lv); ++i) {
        const AvgNode& n = t.node(lv, i);
        std::cout << "level " << lv << " node " << i << ": k=" << n.k() << " range=[" << n.ran().lo << ","
                  << n.ran().hi << "]\n";
      }
    std::cout << "root support " << t.root().vec.size() << "\n";
  }
  return kOk;
}

int cmd_verify(const Globals& g, cli::SuiteParams p, const std::string& suite) {
  auto& table = cli::suite_table();
  auto it = table.find(suite);
  if (it == table.end()) {
    std::string names;
    for (auto& [k, v] : table) names += " " + k;
    throw Error("unknown suite '" + suite + "'; available:" + names);
  }
  p.space = io::parse_space(g.space);
  p.seed = g.seed;
  p.deadline = cli::Deadline(g.budget_ms);
  cli::SuiteResult r;
  try {
    r = it->second(p);
  } catch (const BudgetExceeded& e) {
    r.suite = suite;
    r.partial = true;
    r.note = std::string("budget exceeded: ") + e.what();
  }
  std::cout << r.suite << ": " << r.count(CheckStatus::holds) << " holds, " << r.failures() << " fails, "
            << r.count(CheckStatus::inconclusive) << " inconclusive, " << r.count(CheckStatus::vacuous)
            << " vacuous" << (r.partial ? " (partial)" : "") << "\n";
  if (!r.note.empty()) std::cout << r.note << "\n";
  for (auto& row : r.rows)
    if (row.status == CheckStatus::fails)
      std::cout << "FAIL " << row.name << " " << row.params << ": " << to_string(row.lhs) << " vs "
                << to_string(row.rhs) << "\n";
  if (!g.out.empty()) {
    write_json(g.out, cli::suite_json(r));
    std::ofstream csv(csv_path(g.out));
    io::write_estimate_csv(csv, r.rows);
  }
  if (r.failures()) return kFailed;
  return r.partial ? kPartial : kOk;
}

int cmd_experiment(const Globals& g, std::size_t j_max, const std::string& eps_text, std::size_t p_max,
                   const std::vector<std::string>& lambdas) {
  const ThetaSeq space = io::parse_space(g.space);
  const Rational eps = parse_rational(eps_text);
  auto ev = std::make_shared<NormEvaluator>(space);
  CacheFile cache(g.cache, space);
  cache.load_into(*ev);
  const cli::Deadline deadline(g.budget_ms);
  bool partial = false;

  std::ostringstream csv;
  io::write_csv_row(csv, {"j", "theta_j", "upper_ratio", "bound_v1", "bound_v2", "eps_used", "note"});
  json rows = json::array();
  for (std::size_t j = 1; j <= j_max; ++j) {
    if (deadline.expired()) {
      partial = true;
      break;
    }
    json row{{"j", j}, {"theta_j", to_string(space.term(j))}};
    std::string upper, eps_used, note;
    // Coarser epsilons keep the average short; the first that fits is used.
    std::vector<Rational> ladder{eps};
    for (const Rational& e : {make_rational(1, 2), make_rational(9, 10)})
      if (e > ladder.back()) ladder.push_back(e);
    for (auto& e : ladder) {
      try {
        auto d = estimate_delta_upper(*ev, BlockSequence::unit_vectors(), j, EpsSchedule::constant(e), 1,
                                      average_budget(g));
        upper = to_string(d.ratio);
        eps_used = to_string(e);
        break;
      } catch (const BudgetExceeded&) {
      }
    }
    if (upper.empty()) {
      partial = true;
      note = "upper ratio: budget exceeded";
    }
    row["upper_ratio"] = upper.empty() ? json(nullptr) : json(upper);
    row["eps_used"] = eps_used.empty() ? json(nullptr) : json(eps_used);
    std::string v1s, v2s;
    try {
      auto v1 = bound_delta_j_v1(space, j, p_max);
      auto v2 = bound_delta_j_v2(space, j, p_max);
      v1s = to_string(v1.value);
      v2s = to_string(v2.value);
      if (!v2.attained)
        note += (note.empty() ? "" : "; ") + std::string("v2 is a supremum, not attained; max on p<=") +
                std::to_string(p_max) + " is " + to_string(v2.range_max);
    } catch (const Uncertifiable& e) {
      note += (note.empty() ? "" : "; ") + std::string("bounds uncertifiable: ") + e.what();
    }
    row["bound_v1"] = v1s.empty() ? json(nullptr) : json(v1s);
    row["bound_v2"] = v2s.empty() ? json(nullptr) : json(v2s);
    row["note"] = note;
    io::write_csv_row(csv, {std::to_string(j), to_string(space.term(j)), upper, v1s, v2s, eps_used, note});
    rows.push_back(row);
  }
  std::cout << csv.str();

  json distortion = json::array();
  std::ostringstream dcsv;
  for (auto& l : lambdas) {
    if (deadline.expired()) {
      partial = true;
      break;
    }
    ExperimentConfig cfg;
    cfg.seed = g.seed;
    cfg.p_max = p_max;
    cfg.max_support = std::min<std::size_t>(g.budget_support, 150);
    try {
      auto rep = distortion_experiment(space, parse_rational(l), cfg);
      std::cout << "lambda " << to_string(rep.lambda) << ": n=" << rep.n << " a=" << to_string(rep.a)
                << " min ratio " << to_string(rep.min_ratio) << " (" << to_double(rep.min_ratio) << ")"
                << " best ratio " << to_string(rep.best_ratio) << " (" << to_double(rep.best_ratio) << "); "
                << rep.note << "\n";
      distortion.push_back(io::distortion_report_json(rep));
      io::write_distortion_csv(dcsv, rep);
    } catch (const BudgetExceeded& e) {
      partial = true;
      std::cout << "lambda " << l << ": budget exceeded (" << e.what() << ")\n";
      distortion.push_back(json{{"lambda", l}, {"status", "partial"}, {"note", e.what()}});
    } catch (const Uncertifiable& e) {
      std::cout << "lambda " << l << ": uncertifiable (" << e.what() << ")\n";
      distortion.push_back(json{{"lambda", l}, {"status", "uncertifiable"}, {"note", e.what()}});
    }
  }
  cache.save_from(*ev);
  if (!g.out.empty()) {
    write_json(g.out, json{{"space", io::thetaseq_json(space)},
                           {"seed", g.seed},
                           {"eps", to_string(eps)},
                           {"p_max", p_max},
                           {"partial", partial},
                           {"rows", rows},
                           {"distortion", distortion}});
    write_text(csv_path(g.out), csv.str());
    if (!lambdas.empty()) write_text(csv_path(g.out, ".distortion"), dcsv.str());
  }
  return partial ? kPartial : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact computations in mixed Tsirelson spaces"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--space", g.space,
                 "tsirelson, tsirelson-s1, harmonic, geometric:p/q, custom:t1,t2,... or a JSON file")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "seed for every random choice")->capture_default_str();
  app.add_option("--out", g.out, "write a JSON report here (CSV tables next to it)");
  app.add_option("--cache", g.cache, "persist norm values in this file, keyed by space id");
  app.add_option("--budget-ms", g.budget_ms, "wall-clock guard in milliseconds (default: $TSL_BUDGET_MS)");
  app.add_option("--budget-support", g.budget_support, "largest support of a constructed average")
      ->capture_default_str();
  app.add_option("--budget-k", g.budget_k, "largest average length")->capture_default_str();

  std::string vec;
  std::vector<std::string> aux;
  bool witness = false;
  auto* norm = app.add_subcommand("norm", "exact norm of a finitely supported vector");
  norm->add_option("--vec", vec, "[[index, coeff], ...] inline or a JSON file")->required();
  norm->add_option("--aux", aux, "auxiliary norm: N=3,p=0 | p=2 | SN=1,p=0");
  norm->add_flag("--witness", witness, "print the optimal nested family");

  std::string set_text, alpha = "1", sequence;
  auto* sch = app.add_subcommand("schreier", "membership of a finite set in S_alpha or S_alpha(N)");
  sch->add_option("--set", set_text, "3,4,5 or [3,4,5]")->required();
  sch->add_option("--alpha", alpha, "finite order or omega")->capture_default_str();
  sch->add_option("--N", sequence, "identity, evens, shifted(k), arithmetic(a,d), geometric-indices(b) or [..]");

  std::size_t reg_k = 10;
  auto* reg = app.add_subcommand("regularize", "regularized weight sequence of a custom table");
  reg->add_option("--k", reg_k, "number of terms")->capture_default_str();

  std::size_t j_max = 6, p_max = 50;
  auto* bounds = app.add_subcommand("bounds", "closed-form upper bounds for delta_j");
  bounds->add_option("--j-max", j_max)->capture_default_str();
  bounds->add_option("--p-max", p_max, "range scanned for the suprema")->capture_default_str();

  unsigned avg_m = 1;
  std::int64_t avg_n = 1;
  std::string avg_eps = "1/2", avg_base = "units";
  bool refine = false;
  auto* avg = app.add_subcommand("average", "build an averaging tree and print or save it");
  avg->add_option("--M", avg_m, "depth")->capture_default_str();
  avg->add_option("--N", avg_n, "starting maximum coordinate")->capture_default_str();
  avg->add_option("--eps", avg_eps)->capture_default_str();
  avg->add_option("--base", avg_base, "units, random:<seed>, subsequence:<sequence>")->capture_default_str();
  avg->add_flag("--refine", refine, "use the longer lengths needed by the tree estimates");

  std::string suite;
  cli::SuiteParams sp;
  auto* ver = app.add_subcommand("verify", "run a named verification suite");
  ver->add_option("suite", suite,
                  "tsirelson-identity, schreier-laws, subsequence-shift, subsequence-drop-min, oracle, "
                  "tree-properties, aux-norm-ratio, regularization, delta1, estimates")
      ->required();
  ver->add_option("--count", sp.count, "number of items (suite default when 0)");
  ver->add_option("--N", sp.sequence, "index sequence for the subsequence suites")->capture_default_str();
  ver->add_option("--alpha-max", sp.alpha_max)->capture_default_str();
  ver->add_option("--f-max", sp.f_max)->capture_default_str();
  ver->add_option("--tree", sp.tree_path, "tree JSON for tree-properties");

  std::size_t exp_j = 2, exp_p = 200;
  std::string exp_eps = "1/10";
  std::vector<std::string> lambdas;
  auto* exp = app.add_subcommand("experiment", "delta_j table and distortion experiments");
  exp->add_option("--j-max", exp_j)->capture_default_str();
  exp->add_option("--eps", exp_eps, "epsilon for the upper-ratio averages")->capture_default_str();
  exp->add_option("--p-max", exp_p)->capture_default_str();
  exp->add_option("--lambda", lambdas, "distortion levels to try");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (!g.budget_ms) g.budget_ms = env_budget_ms();
    if (*norm) return cmd_norm(g, vec, aux, witness);
    if (*sch) return cmd_schreier(g, set_text, alpha, sequence);
    if (*reg) return cmd_regularize(g, reg_k);
    if (*bounds) return cmd_bounds(g, j_max, p_max);
    if (*avg) return cmd_average(g, avg_m, avg_n, avg_eps, refine, avg_base);
    if (*ver) return cmd_verify(g, sp, suite);
    if (*exp) return cmd_experiment(g, exp_j, exp_eps, exp_p, lambdas);
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return kBadInput;
}
