#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "icterm/corpus.hpp"
#include "icterm/ic_engine.hpp"
#include "icterm/ic_tree.hpp"
#include "icterm/mode_analysis.hpp"
#include "icterm/parser.hpp"
#include "icterm/report.hpp"
#include "icterm/termination.hpp"

namespace {

using namespace icterm;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitUsage = 2;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// ICTERM_BUDGET overrides every default budget; explicit flags win over it.
std::optional<std::size_t> env_budget(std::string* error) {
  const char* raw = std::getenv("ICTERM_BUDGET");
  if (!raw) return std::nullopt;
  try {
    std::size_t pos = 0;
    long long v = std::stoll(raw, &pos);
    if (pos != std::string(raw).size() || v <= 0) throw std::invalid_argument("");
    return static_cast<std::size_t>(v);
  } catch (...) {
    *error = std::string("invalid ICTERM_BUDGET value: ") + raw;
    return std::nullopt;
  }
}

struct Loaded {
  ModedProgram program;
  std::vector<std::string> warnings;
};

/// Parses `path`, printing errors and returning nullopt on failure.
std::optional<Loaded> load_program(const std::string& path) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << "cannot read " << path << "\n";
    return std::nullopt;
  }
  ProgramParse pp = parse_program(*text);
  if (!pp.ok()) {
    for (const ParseError& e : pp.errors)
      std::cerr << path << ":" << e.render() << "\n";
    return std::nullopt;
  }
  return Loaded{std::move(*pp.program), std::move(pp.warnings)};
}

struct LoadedQuery {
  Query query;
  ModedProgram program;  // modes extended for undeclared query predicates
  VarNames names;        // program + query display names
};

std::optional<LoadedQuery> load_query(const ModedProgram& p,
                                      const std::string& text) {
  QueryParse qp = parse_query(text, p);
  if (!qp.ok()) {
    for (const ParseError& e : qp.errors)
      std::cerr << "query:" << e.render() << "\n";
    return std::nullopt;
  }
  LoadedQuery lq;
  lq.query = *qp.query;
  lq.program = with_query_modes(p, qp);
  lq.names = p.var_names;
  lq.names.insert(qp.names.begin(), qp.names.end());
  return lq;
}

std::string yn(bool b) { return b ? "yes" : "no"; }

std::string render_witness(const ModednessReport& rep, const ModedProgram& p) {
  if (rep.holds || !rep.witness) return "";
  const ModednessWitness& w = *rep.witness;
  std::ostringstream os;
  os << w.condition;
  if (rep.clause_index) os << " in clause " << *rep.clause_index;
  if (w.atom_index >= 0) os << " at atom " << w.atom_index;
  if (w.variable >= 0)
    os << " on " << to_string(Term::var(w.variable), &p.var_names);
  if (!w.detail.empty()) os << " (" << w.detail << ")";
  return os.str();
}

/// `app(1,0,_) + 0` style rendering of one mapping entry.
std::string render_mapping_entry(const std::string& pred,
                                 const LevelMapping::Entry& entry,
                                 const Mode& mode) {
  std::ostringstream os;
  os << pred << '(';
  for (std::size_t i = 0; i < mode.flows.size(); ++i) {
    if (i) os << ',';
    if (mode.flows[i] == Flow::Out)
      os << '_';
    else
      os << (i < entry.coeffs.size() ? entry.coeffs[i] : 0);
  }
  os << ") + " << entry.constant;
  return os.str();
}

std::vector<std::string> render_mapping(const LevelMapping& l,
                                        const ModedProgram& p) {
  std::vector<std::string> out;
  for (const auto& [pred, entry] : l.entries)
    if (p.declares(pred))
      out.push_back(render_mapping_entry(pred, entry, p.mode_of(pred)));
  return out;
}

std::vector<QrLine> render_qr(const QrReport& qr, const ModedProgram& p) {
  std::vector<QrLine> lines;
  for (const QrPair& pair : qr.pairs)
    lines.push_back({pair.clause_index, pair.body_index, pair.proven,
                     to_string(pair.difference, &p.var_names),
                     pair.obstruction});
  return lines;
}

AnalysisReport analyze(const std::string& file, const ModedProgram& p,
                       const std::vector<std::string>& warnings, bool permute,
                       bool infer) {
  auto start = std::chrono::steady_clock::now();
  AnalysisReport r;
  r.file = file;
  r.parse_ok = true;
  r.warnings = warnings;

  ModednessReport nm = check_nicely_moded(p);
  ModednessReport sm = check_simply_moded(p);
  DepGraph g = build_dep_graph(p);
  ModednessReport ir = check_input_recursive(p, g);
  r.nicely_moded = nm.holds;
  r.simply_moded = sm.holds;
  r.input_recursive = ir.holds;
  r.nm_witness = render_witness(nm, p);
  r.sm_witness = render_witness(sm, p);
  r.ir_witness = render_witness(ir, p);
  r.sccs = g.sccs();
  for (const std::string& pred : p.defined_preds()) r.dep[pred] = g.dep(pred);

  if (permute) {
    bool nm_all = true;
    bool sm_all = true;
    for (std::size_t ci = 0; ci < p.clauses.size(); ++ci) {
      auto perm_nm = find_permutation(p.clauses[ci], p,
                                      ModednessClass::NicelyModed);
      auto perm_sm = find_permutation(p.clauses[ci], p,
                                      ModednessClass::SimplyModed);
      nm_all = nm_all && perm_nm.has_value();
      sm_all = sm_all && perm_sm.has_value();
      auto& chosen = perm_sm ? perm_sm : perm_nm;
      if (chosen) {
        bool identity = true;
        for (std::size_t k = 0; k < chosen->size(); ++k)
          if ((*chosen)[k] != static_cast<int>(k)) identity = false;
        if (!identity) r.permutations[static_cast<int>(ci)] = *chosen;
      }
    }
    r.permutation_nicely_moded = nm_all;
    r.permutation_simply_moded = sm_all;
  }

  std::optional<LevelMapping> mapping;
  if (infer) {
    r.mapping_source = "inferred";
    try {
      mapping = infer_level_mapping(p, g);
    } catch (const SearchSpaceTooLarge& e) {
      r.warnings.push_back(e.what());
    }
  } else if (!p.level_annotations.empty()) {
    r.mapping_source = "declared";
    mapping = from_annotations(p);
  } else {
    r.mapping_source = "none";
  }
  if (mapping) {
    QrReport qr = check_quasi_recurrent(p, *mapping, g);
    r.mapping = render_mapping(*mapping, p);
    r.quasi_recurrent = qr.all_proven();
    r.qr_pairs = render_qr(qr, p);
  } else if (r.mapping_source == "inferred") {
    r.quasi_recurrent = false;  // exhausted the search family
  }

  auto end = std::chrono::steady_clock::now();
  r.elapsed_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(
          end - start)
          .count();
  return r;
}

void print_analysis_text(const AnalysisReport& r) {
  std::cout << "file: " << r.file << "\n";
  for (const std::string& w : r.warnings) std::cout << "warning: " << w << "\n";
  auto flag = [](const std::string& name, bool v, const std::string& witness) {
    std::cout << name << ": " << (v ? "yes" : "no");
    if (!witness.empty()) std::cout << "  [" << witness << "]";
    std::cout << "\n";
  };
  flag("nicely moded", r.nicely_moded, r.nm_witness);
  flag("simply moded", r.simply_moded, r.sm_witness);
  flag("input recursive", r.input_recursive, r.ir_witness);
  std::cout << "sccs (callers first):";
  for (const auto& scc : r.sccs) {
    std::cout << " {";
    for (std::size_t i = 0; i < scc.size(); ++i)
      std::cout << (i ? " " : "") << scc[i];
    std::cout << "}";
  }
  std::cout << "\n";
  if (r.permutation_nicely_moded)
    std::cout << "permutation nicely moded: " << yn(*r.permutation_nicely_moded)
              << "\n";
  if (r.permutation_simply_moded)
    std::cout << "permutation simply moded: " << yn(*r.permutation_simply_moded)
              << "\n";
  for (const auto& [clause, order] : r.permutations) {
    std::cout << "clause " << clause << " body order:";
    for (int idx : order) std::cout << " " << idx;
    std::cout << "\n";
  }
  std::cout << "level mapping (" << r.mapping_source << ")";
  for (const std::string& m : r.mapping) std::cout << " " << m;
  std::cout << "\n";
  if (r.quasi_recurrent)
    std::cout << "quasi recurrent: " << (*r.quasi_recurrent ? "Proven" : "Unknown")
              << "\n";
  else
    std::cout << "quasi recurrent: not checked (no mapping)\n";
  for (const QrLine& q : r.qr_pairs) {
    std::cout << "  clause " << q.clause_index << " atom " << q.body_index
              << ": |H| - |B| = " << q.difference << " -> "
              << (q.proven ? "Proven" : "Unknown");
    if (!q.obstruction.empty()) std::cout << " (" << q.obstruction << ")";
    std::cout << "\n";
  }
}

int cmd_analyze(const std::string& file, bool permute, bool infer,
                const std::string& format) {
  auto loaded = load_program(file);
  if (!loaded) return kExitUsage;
  AnalysisReport r = analyze(file, loaded->program, loaded->warnings, permute,
                             infer);
  if (format == "json")
    std::cout << report_to_json(r) << "\n";
  else
    print_analysis_text(r);
  return kExitOk;
}

int cmd_trace(const std::string& file, const std::string& query_text,
              const std::string& strategy_name, const std::string& script_text,
              Budget budget, const std::string& format) {
  auto loaded = load_program(file);
  if (!loaded) return kExitUsage;
  auto lq = load_query(loaded->program, query_text);
  if (!lq) return kExitUsage;

  SelectionStrategy strategy;
  if (strategy_name == "scripted") {
    std::vector<int> script;
    std::stringstream ss(script_text);
    for (std::string part; std::getline(ss, part, ',');)
      try {
        script.push_back(std::stoi(part));
      } catch (...) {
        std::cerr << "invalid --script entry: " << part << "\n";
        return kExitUsage;
      }
    strategy = SelectionStrategy::scripted(std::move(script));
  }

  Derivation d;
  try {
    d = derive(lq->program, lq->query, strategy, budget);
  } catch (const std::invalid_argument& e) {
    std::cerr << "trace: " << e.what() << "\n";
    return kExitUsage;
  }

  const VarNames* names = &lq->names;
  if (format == "json") {
    json steps = json::array();
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
      const DerivationStep& s = d.steps[i];
      VarSet source_vars = vars_of(s.source);
      steps.push_back(
          {{"index", i},
           {"atom", s.atom_index},
           {"selected", to_string(s.source[s.atom_index], names)},
           {"clause", s.clause_ordinal},
           {"mgu", to_string(s.mgu.restricted_to(source_vars), names)},
           {"resolvent", to_string(s.resolvent, names)}});
    }
    json j{{"file", file},
           {"query", to_string(lq->query, names)},
           {"status", to_string(d.status)},
           {"steps", steps},
           {"answer", to_string(d.answer, names)},
           {"steps_explored", d.steps_explored},
           {"backtracks", d.backtracks}};
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }

  std::cout << "query: " << to_string(lq->query, names) << "\n";
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    const DerivationStep& s = d.steps[i];
    VarSet source_vars = vars_of(s.source);
    std::cout << "  " << (i + 1) << ". select "
              << to_string(s.source[s.atom_index], names) << " [atom "
              << s.atom_index << "] via ";
    if (s.clause_ordinal < 0)
      std::cout << "builtin";
    else
      std::cout << "clause " << s.clause_ordinal;
    std::cout << ", mgu " << to_string(s.mgu.restricted_to(source_vars), names)
              << "\n     -> " << to_string(s.resolvent, names) << "\n";
  }
  std::cout << "status: " << to_string(d.status) << " (" << d.length()
            << " steps, " << d.steps_explored << " explored, " << d.backtracks
            << " backtracks)\n";
  if (d.status == DerivationStatus::Success)
    std::cout << "answer: " << to_string(d.answer, names) << "\n";
  return kExitOk;
}

int cmd_tree(const std::string& file, const std::string& query_text,
             std::size_t budget, bool dump, const std::string& format) {
  auto loaded = load_program(file);
  if (!loaded) return kExitUsage;
  auto lq = load_query(loaded->program, query_text);
  if (!lq) return kExitUsage;

  IcTree t = build_ic_tree(lq->program, lq->query, budget);
  if (format == "json") {
    json nodes = json::array();
    for (const IcTree::Node& n : t.nodes) {
      json children = json::array();
      for (const IcTree::Edge& e : n.children)
        children.push_back({{"atom", e.atom_index},
                            {"clause", e.clause_ordinal},
                            {"child", e.child}});
      nodes.push_back({{"query", to_string(n.query)},
                       {"depth", n.depth},
                       {"children", children}});
    }
    json j{{"file", file},
           {"query", to_string(lq->query, &lq->names)},
           {"complete", t.complete},
           {"nodes", t.size()},
           {"max_depth", t.max_depth}};
    if (dump) j["tree"] = nodes;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }

  std::cout << "query: " << to_string(lq->query, &lq->names) << "\n";
  if (t.complete)
    std::cout << t.size() << " nodes (complete), max depth " << t.max_depth
              << "\n";
  else
    std::cout << "≥" << t.size() << " nodes (budget cut)\n";
  if (dump) std::cout << render_tree(t);
  return kExitOk;
}

int cmd_prove(const std::string& file, bool infer, const std::string& format) {
  auto loaded = load_program(file);
  if (!loaded) return kExitUsage;
  const ModedProgram& p = loaded->program;

  LevelMapping mapping;
  std::string note;
  if (infer) {
    DepGraph g = build_dep_graph(p);
    std::optional<LevelMapping> found;
    try {
      found = infer_level_mapping(p, g);
    } catch (const SearchSpaceTooLarge& e) {
      note = e.what();
    }
    if (found)
      mapping = *found;
    else if (note.empty())
      note = "no level mapping in the {0,1} coefficient family fits";
  } else if (!p.level_annotations.empty()) {
    mapping = from_annotations(p);
  } else {
    std::cerr << "no level mapping declared; pass --infer or add "
                 ":- level directives\n";
    return kExitUsage;
  }

  TheoremReport rep = prove_input_termination(p, mapping);
  if (!note.empty()) rep.note = rep.note.empty() ? note : rep.note + "; " + note;

  if (format == "json") {
    json j{{"file", file},
           {"proven", rep.proven},
           {"failed_hypotheses", rep.failed_hypotheses},
           {"mapping", render_mapping(rep.mapping, p)},
           {"used_permutation", rep.used_permutation},
           {"note", rep.note}};
    json pairs = json::array();
    for (const QrLine& q : render_qr(rep.qr, p))
      pairs.push_back({{"clause", q.clause_index},
                       {"body_atom", q.body_index},
                       {"proven", q.proven},
                       {"difference", q.difference},
                       {"obstruction", q.obstruction}});
    j["qr_pairs"] = pairs;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "input termination: " << (rep.proven ? "PROVEN" : "NOT PROVEN")
              << "\n";
    for (const std::string& h : rep.failed_hypotheses)
      std::cout << "  failed: " << h << "\n";
    if (!rep.note.empty()) std::cout << "  note: " << rep.note << "\n";
    for (const std::string& m : render_mapping(rep.mapping, p))
      std::cout << "  level " << m << "\n";
    for (const QrLine& q : render_qr(rep.qr, p)) {
      std::cout << "  clause " << q.clause_index << " atom " << q.body_index
                << ": |H| - |B| = " << q.difference << " -> "
                << (q.proven ? "Proven" : "Unknown");
      if (!q.obstruction.empty()) std::cout << " (" << q.obstruction << ")";
      std::cout << "\n";
    }
  }
  return rep.proven ? kExitOk : kExitMismatch;
}

int cmd_corpus(const std::string& filter, const std::string& format) {
  CorpusResult result = run_corpus(filter);
  if (result.entries.empty()) {
    std::cerr << "no corpus entry matches filter: " << filter << "\n";
    return kExitUsage;
  }
  if (format == "json") {
    json entries = json::array();
    for (const EntryResult& e : result.entries)
      entries.push_back({{"name", e.name},
                         {"ok", e.ok},
                         {"diffs", e.diffs},
                         {"notes", e.notes},
                         {"millis", e.millis}});
    json j{{"entries", entries}, {"all_ok", result.all_ok()}};
    std::cout << j.dump(2) << "\n";
  } else {
    for (const EntryResult& e : result.entries) {
      std::cout << (e.ok ? "PASS" : "FAIL") << " " << e.name << "\n";
      for (const std::string& d : e.diffs) std::cout << "  diff: " << d << "\n";
      for (const std::string& n : e.notes) std::cout << "  " << n << "\n";
    }
    std::cout << (result.all_ok() ? "all entries pass" : "mismatches found")
              << "\n";
  }
  return result.all_ok() ? kExitOk : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Termination analysis for logic programs under "
               "input-consuming resolution"};
  app.require_subcommand(1);

  std::string budget_error;
  std::optional<std::size_t> env = env_budget(&budget_error);
  if (!budget_error.empty()) {
    std::cerr << budget_error << "\n";
    return kExitUsage;
  }
  Budget default_budget;
  std::size_t default_nodes = kDefaultNodeBudget;
  if (env) {
    default_budget.max_steps = *env;
    default_budget.max_backtracks = *env;
    default_nodes = *env;
  }

  std::string file, query, format = "text";
  bool permute = false, infer = false, dump = false;
  std::string strategy = "leftmost", script;
  Budget budget = default_budget;
  std::size_t node_budget = default_nodes;
  std::string filter;

  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"text", "json"}));
  };

  CLI::App* a = app.add_subcommand("analyze", "Mode and termination analysis");
  a->add_option("file", file, "Program file")->required();
  a->add_flag("--permute", permute, "Also search for body permutations");
  a->add_flag("--infer", infer, "Infer a level mapping over {0,1} coefficients");
  add_format(a);

  CLI::App* t = app.add_subcommand("trace", "Run one derivation");
  t->add_option("file", file, "Program file")->required();
  t->add_option("query", query, "Query")->required();
  t->add_option("--strategy", strategy, "Selection strategy")
      ->check(CLI::IsMember({"leftmost", "scripted"}));
  t->add_option("--script", script, "Comma-separated atom indices (scripted)");
  t->add_option("--max-steps", budget.max_steps, "Step budget");
  t->add_option("--max-backtracks", budget.max_backtracks, "Backtrack budget");
  add_format(t);

  CLI::App* tr = app.add_subcommand("tree", "Build the IC-tree of a query");
  tr->add_option("file", file, "Program file")->required();
  tr->add_option("query", query, "Query")->required();
  tr->add_option("--budget", node_budget, "Node budget");
  tr->add_flag("--dump", dump, "Print every node");
  add_format(tr);

  CLI::App* pr = app.add_subcommand("prove", "Prove input termination");
  pr->add_option("file", file, "Program file")->required();
  pr->add_flag("--infer", infer, "Infer a level mapping over {0,1} coefficients");
  add_format(pr);

  CLI::App* co = app.add_subcommand("corpus", "Check the bundled corpus");
  co->add_option("--filter", filter, "Substring filter on entry names");
  add_format(co);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (a->parsed()) return cmd_analyze(file, permute, infer, format);
    if (t->parsed())
      return cmd_trace(file, query, strategy, script, budget, format);
    if (tr->parsed()) return cmd_tree(file, query, node_budget, dump, format);
    if (pr->parsed()) return cmd_prove(file, infer, format);
    if (co->parsed()) return cmd_corpus(filter, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
