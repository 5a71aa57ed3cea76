#include "icterm/mode_analysis.hpp"

#include <algorithm>

namespace icterm {

namespace {

std::vector<VarId> vars_in_order(std::span<const Term> ts) {
  std::vector<VarId> out;
  struct Walk {
    std::vector<VarId>& out;
    void go(const Term& t) {
      if (t.is_var()) {
        out.push_back(t.var_id());
        return;
      }
      for (const Term& a : t.args()) go(a);
    }
  } walk{out};
  for (const Term& t : ts) walk.go(t);
  return out;
}

/// First atom index j in [from, n) whose outputs contain v; -1 if none.
int producer_of(VarId v, const Query& q, const ModedProgram& p, int from) {
  for (int j = from; j < static_cast<int>(q.size()); ++j) {
    VarSet o = vars_of(std::span<const Term>(output_args(q[j], p)));
    if (o.count(v)) return j;
  }
  return -1;
}

std::optional<ModednessWitness> scan_query(const Query& q,
                                           const ModedProgram& p,
                                           ModednessClass target) {
  // Output side first: a linear sequence (of variables, for simply moded).
  std::map<VarId, int> seen;  // var -> atom of first occurrence
  for (int i = 0; i < static_cast<int>(q.size()); ++i) {
    std::vector<Term> outs = output_args(q[i], p);
    if (target == ModednessClass::SimplyModed) {
      for (const Term& t : outs)
        if (!t.is_var())
          return ModednessWitness{"output-not-variable", -1, i, -1,
                                  "output term " + to_string(t) +
                                      " of atom " + std::to_string(i + 1) +
                                      " is not a variable"};
    }
    for (VarId v : vars_in_order(outs)) {
      auto [it, fresh] = seen.emplace(v, i);
      if (!fresh)
        return ModednessWitness{"outputs-not-linear", v, i, it->second,
                                "variable occurs in the outputs of atoms " +
                                    std::to_string(it->second + 1) + " and " +
                                    std::to_string(i + 1)};
    }
  }
  // Inputs of an atom may not share variables with its own or any later
  // atom's outputs.
  for (int i = 0; i < static_cast<int>(q.size()); ++i) {
    VarSet later;
    for (int j = i; j < static_cast<int>(q.size()); ++j)
      collect_vars(std::span<const Term>(output_args(q[j], p)), later);
    for (VarId v : vars_in_order(input_args(q[i], p)))
      if (later.count(v))
        return ModednessWitness{"input-meets-later-output", v, i,
                                producer_of(v, q, p, i),
                                "input variable of atom " +
                                    std::to_string(i + 1) +
                                    " occurs in the outputs of atom " +
                                    std::to_string(producer_of(v, q, p, i) + 1)};
  }
  return std::nullopt;
}

std::optional<ModednessWitness> scan_clause(const Clause& c,
                                            const ModedProgram& p,
                                            ModednessClass target) {
  if (auto w = scan_query(c.body, p, target)) return w;
  VarSet body_out;
  for (const Atom& a : c.body)
    collect_vars(std::span<const Term>(output_args(a, p)), body_out);
  for (VarId v : vars_in_order(input_args(c.head, p)))
    if (body_out.count(v)) {
      int prod = producer_of(v, c.body, p, 0);
      return ModednessWitness{"head-input-meets-body-output", v, -1, prod,
                              "head input variable occurs in the outputs of "
                              "body atom " +
                                  std::to_string(prod + 1)};
    }
  return std::nullopt;
}

ModednessReport report_of(std::optional<ModednessWitness> w) {
  ModednessReport r;
  r.holds = !w.has_value();
  r.witness = std::move(w);
  return r;
}

}  // namespace

ModednessReport check_nicely_moded(const Query& q, const ModedProgram& p) {
  return report_of(scan_query(q, p, ModednessClass::NicelyModed));
}

ModednessReport check_nicely_moded(const Clause& c, const ModedProgram& p) {
  return report_of(scan_clause(c, p, ModednessClass::NicelyModed));
}

ModednessReport check_simply_moded(const Query& q, const ModedProgram& p) {
  return report_of(scan_query(q, p, ModednessClass::SimplyModed));
}

ModednessReport check_simply_moded(const Clause& c, const ModedProgram& p) {
  return report_of(scan_clause(c, p, ModednessClass::SimplyModed));
}

namespace {

ModednessReport program_scan(const ModedProgram& p, ModednessClass target) {
  for (int i = 0; i < static_cast<int>(p.clauses.size()); ++i) {
    if (auto w = scan_clause(p.clauses[i], p, target)) {
      ModednessReport r = report_of(std::move(w));
      r.clause_index = i;
      return r;
    }
  }
  return report_of(std::nullopt);
}

}  // namespace

ModednessReport check_nicely_moded(const ModedProgram& p) {
  return program_scan(p, ModednessClass::NicelyModed);
}

ModednessReport check_simply_moded(const ModedProgram& p) {
  return program_scan(p, ModednessClass::SimplyModed);
}

int DepGraph::index(const std::string& p) const {
  auto it = id_.find(p);
  if (it == id_.end()) throw std::invalid_argument("unknown predicate " + p);
  return it->second;
}

bool DepGraph::refers_to(const std::string& p, const std::string& q) const {
  return edge_[index(p)][index(q)];
}

bool DepGraph::depends(const std::string& p, const std::string& q) const {
  return closure_[index(p)][index(q)];
}

bool DepGraph::mutual(const std::string& p, const std::string& q) const {
  return depends(p, q) && depends(q, p);
}

bool DepGraph::strict(const std::string& p, const std::string& q) const {
  return depends(p, q) && !depends(q, p);
}

int DepGraph::dep(const std::string& p) const {
  int i = index(p);
  int n = 0;
  for (std::size_t j = 0; j < preds_.size(); ++j)
    if (defined_[j] && closure_[i][j]) ++n;
  return n;
}

DepGraph build_dep_graph(const ModedProgram& p) {
  DepGraph g;
  auto add = [&](const std::string& pred) {
    if (!g.id_.count(pred)) {
      g.id_.emplace(pred, static_cast<int>(g.preds_.size()));
      g.preds_.push_back(pred);
    }
  };
  for (const Clause& c : p.clauses) {
    add(c.head.pred);
    for (const Atom& a : c.body) add(a.pred);
  }
  std::size_t n = g.preds_.size();
  g.edge_.assign(n, std::vector<bool>(n, false));
  g.closure_.assign(n, std::vector<bool>(n, false));
  g.defined_.assign(n, false);
  for (const Clause& c : p.clauses) {
    int h = g.id_.at(c.head.pred);
    g.defined_[h] = true;
    for (const Atom& a : c.body) g.edge_[h][g.id_.at(a.pred)] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    g.closure_[i] = g.edge_[i];
    g.closure_[i][i] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (g.closure_[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (g.closure_[k][j]) g.closure_[i][j] = true;

  // Components are classes of the mutual-dependency equivalence; order them
  // callers first, smallest representative breaking ties.
  std::vector<int> comp(n, -1);
  std::vector<std::vector<std::string>> groups;
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return g.preds_[a] < g.preds_[b];
  });
  for (int i : order) {
    if (comp[i] >= 0) continue;
    int id = static_cast<int>(groups.size());
    groups.emplace_back();
    for (int j : order)
      if (comp[j] < 0 && g.closure_[i][j] && g.closure_[j][i]) {
        comp[j] = id;
        groups[id].push_back(g.preds_[j]);
      }
  }
  std::vector<std::vector<int>> succ(groups.size());
  std::vector<int> indeg(groups.size(), 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (g.edge_[i][j] && comp[i] != comp[j]) {
        succ[comp[i]].push_back(comp[j]);
        ++indeg[comp[j]];
      }
  std::vector<int> ready;
  for (std::size_t c = 0; c < groups.size(); ++c)
    if (indeg[c] == 0) ready.push_back(static_cast<int>(c));
  while (!ready.empty()) {
    auto best = std::min_element(ready.begin(), ready.end(), [&](int a, int b) {
      return groups[a].front() < groups[b].front();
    });
    int c = *best;
    ready.erase(best);
    g.sccs_.push_back(groups[c]);
    for (int s : succ[c])
      if (--indeg[s] == 0) ready.push_back(s);
  }
  return g;
}

ModednessReport check_input_recursive(const ModedProgram& p,
                                      const DepGraph& g) {
  for (int ci = 0; ci < static_cast<int>(p.clauses.size()); ++ci) {
    const Clause& c = p.clauses[ci];
    VarSet head_in = vars_of(std::span<const Term>(input_args(c.head, p)));
    for (int bi = 0; bi < static_cast<int>(c.body.size()); ++bi) {
      const Atom& b = c.body[bi];
      if (!g.mutual(c.head.pred, b.pred)) continue;
      for (VarId v :
           vars_in_order(std::span<const Term>(input_args(b, p))))
        if (!head_in.count(v)) {
          ModednessReport r;
          r.holds = false;
          r.clause_index = ci;
          r.witness = ModednessWitness{
              "recursive-input-escapes", v, bi, -1,
              "input variable of the recursive call " + to_string(b, &p.var_names) +
                  " does not occur in the head's inputs"};
          return r;
        }
    }
  }
  ModednessReport r;
  r.holds = true;
  return r;
}

namespace {

std::optional<std::vector<int>> order_atoms(const Query& q,
                                            const ModedProgram& p,
                                            ModednessClass target) {
  if (q.size() > 8)
    throw BodyTooLongError("permutation search limited to 8 atoms, got " +
                           std::to_string(q.size()));
  int n = static_cast<int>(q.size());
  // Order-independent requirements first.
  std::vector<Term> all_outs;
  for (const Atom& a : q)
    for (Term& t : output_args(a, p)) all_outs.push_back(std::move(t));
  if (!is_linear(all_outs)) return std::nullopt;
  if (target == ModednessClass::SimplyModed)
    for (const Term& t : all_outs)
      if (!t.is_var()) return std::nullopt;
  std::vector<VarSet> in(n), out(n);
  for (int i = 0; i < n; ++i) {
    in[i] = vars_of(std::span<const Term>(input_args(q[i], p)));
    out[i] = vars_of(std::span<const Term>(output_args(q[i], p)));
    for (VarId v : in[i])
      if (out[i].count(v)) return std::nullopt;
  }
  // An atom consuming another's output must come after it: precedence
  // edges producer -> consumer, solved by smallest-index-first topsort.
  std::vector<std::vector<bool>> prec(n, std::vector<bool>(n, false));
  std::vector<int> indeg(n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      bool meets = false;
      for (VarId v : in[a])
        if (out[b].count(v)) {
          meets = true;
          break;
        }
      if (meets) {
        prec[b][a] = true;
        ++indeg[a];
      }
    }
  std::vector<int> result;
  std::vector<bool> placed(n, false);
  for (int step = 0; step < n; ++step) {
    int pick = -1;
    for (int i = 0; i < n; ++i)
      if (!placed[i] && indeg[i] == 0) {
        pick = i;
        break;
      }
    if (pick < 0) return std::nullopt;  // cyclic data flow
    placed[pick] = true;
    result.push_back(pick);
    for (int j = 0; j < n; ++j)
      if (prec[pick][j]) --indeg[j];
  }
  return result;
}

}  // namespace

std::optional<std::vector<int>> find_permutation(const Query& q,
                                                 const ModedProgram& p,
                                                 ModednessClass target) {
  return order_atoms(q, p, target);
}

std::optional<std::vector<int>> find_permutation(const Clause& c,
                                                 const ModedProgram& p,
                                                 ModednessClass target) {
  VarSet body_out;
  for (const Atom& a : c.body)
    collect_vars(std::span<const Term>(output_args(a, p)), body_out);
  for (VarId v : vars_of(std::span<const Term>(input_args(c.head, p))))
    if (body_out.count(v)) return std::nullopt;
  return order_atoms(c.body, p, target);
}

bool extends(const ModedProgram& p, const ModedProgram& r) {
  std::set<std::string> defined = p.defined_preds();
  for (const Clause& c : r.clauses) {
    if (defined.count(c.head.pred)) return false;
    for (const Atom& a : c.body)
      if (defined.count(a.pred)) return false;
  }
  return true;
}

}  // namespace icterm
