#include "icterm/termination.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "icterm/ic_tree.hpp"

namespace icterm {

SymbolicSize SymbolicSize::operator+(const SymbolicSize& o) const {
  SymbolicSize r = *this;
  r.constant += o.constant;
  for (const auto& [v, k] : o.coeffs) {
    long long n = (r.coeffs.count(v) ? r.coeffs[v] : 0) + k;
    if (n == 0)
      r.coeffs.erase(v);
    else
      r.coeffs[v] = n;
  }
  return r;
}

SymbolicSize SymbolicSize::operator-(const SymbolicSize& o) const {
  return *this + o.scaled(-1);
}

SymbolicSize SymbolicSize::scaled(long long k) const {
  SymbolicSize r;
  if (k == 0) return r;
  r.constant = constant * k;
  for (const auto& [v, c] : coeffs) r.coeffs[v] = c * k;
  return r;
}

long long SymbolicSize::eval(const std::map<VarId, long long>& sizes) const {
  long long n = constant;
  for (const auto& [v, k] : coeffs) {
    auto it = sizes.find(v);
    n += k * (it == sizes.end() ? 0 : it->second);
  }
  return n;
}

SymbolicSize symbolic_tsize(const Term& t) {
  SymbolicSize s;
  if (t.is_var()) {
    s.coeffs[t.var_id()] = 1;
    return s;
  }
  s.constant = 1;
  for (const Term& a : t.args()) s = s + symbolic_tsize(a);
  return s;
}

std::string to_string(const SymbolicSize& s, const VarNames* names) {
  std::ostringstream os;
  os << s.constant;
  for (const auto& [v, k] : s.coeffs) {
    os << (k < 0 ? " - " : " + ");
    if (std::abs(k) != 1) os << std::abs(k) << "*";
    os << "TSize(" << to_string(Term::var(v), names) << ")";
  }
  return os.str();
}

SymbolicSize LevelMapping::level_of(const Atom& a,
                                    const ModedProgram& p) const {
  auto it = entries.find(a.pred);
  SymbolicSize s;
  if (it == entries.end()) return s;  // zero mapping
  s.constant = it->second.constant;
  const Mode& m = p.mode_of(a.pred);
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (m.flows[i] != Flow::In || i >= it->second.coeffs.size()) continue;
    long long k = it->second.coeffs[i];
    if (k != 0) s = s + symbolic_tsize(a.args[i]).scaled(k);
  }
  return s;
}

LevelMapping from_annotations(const ModedProgram& p) {
  LevelMapping l;
  for (const auto& [pred, ann] : p.level_annotations) {
    LevelMapping::Entry e;
    e.constant = ann.constant;
    for (const auto& c : ann.coeffs) e.coeffs.push_back(c.value_or(0));
    l.entries.emplace(pred, std::move(e));
  }
  return l;
}

bool QrReport::all_proven() const {
  for (const QrPair& p : pairs)
    if (!p.proven) return false;
  return true;
}

QrReport check_quasi_recurrent(const ModedProgram& p, const LevelMapping& l,
                               const DepGraph& g) {
  QrReport report;
  for (int ci = 0; ci < static_cast<int>(p.clauses.size()); ++ci) {
    const Clause& c = p.clauses[ci];
    SymbolicSize head = l.level_of(c.head, p);
    for (int bi = 0; bi < static_cast<int>(c.body.size()); ++bi) {
      const Atom& b = c.body[bi];
      if (!g.mutual(c.head.pred, b.pred)) continue;
      QrPair pair{ci, bi, true, head - l.level_of(b, p), ""};
      for (const auto& [v, k] : pair.difference.coeffs)
        if (k < 0) {
          pair.proven = false;
          pair.obstruction = "negative coefficient on " +
                             to_string(Term::var(v), &p.var_names);
          break;
        }
      if (pair.proven && pair.difference.constant < 1) {
        pair.proven = false;
        pair.obstruction = "constant term " +
                           std::to_string(pair.difference.constant) +
                           " is below 1";
      }
      report.pairs.push_back(std::move(pair));
    }
  }
  return report;
}

namespace {

bool scc_pairs_proven(const ModedProgram& p, const LevelMapping& l,
                      const DepGraph& g, const std::set<std::string>& preds) {
  QrReport r = check_quasi_recurrent(p, l, g);
  for (const QrPair& pair : r.pairs) {
    if (!preds.count(p.clauses[pair.clause_index].head.pred)) continue;
    if (!pair.proven) return false;
  }
  return true;
}

}  // namespace

std::optional<LevelMapping> infer_level_mapping(const ModedProgram& p,
                                                const DepGraph& g) {
  LevelMapping result;
  // Quasi-recurrency constrains only pairs inside one component, so each
  // component is searched independently, callers first.
  for (const auto& scc : g.sccs()) {
    std::set<std::string> preds(scc.begin(), scc.end());
    // Slots: input positions of the component's defined predicates.
    std::vector<std::pair<std::string, int>> slots;
    for (const std::string& pred : scc) {
      if (is_builtin_pred(pred) || !p.modes.count(pred)) continue;
      const Mode& m = p.mode_of(pred);
      for (int i = 0; i < m.arity(); ++i)
        if (m.flows[i] == Flow::In) slots.emplace_back(pred, i);
    }
    if (slots.size() > 20)
      throw SearchSpaceTooLarge("level mapping search over " +
                                std::to_string(slots.size()) +
                                " input positions exceeds 2^20 candidates");
    bool found = false;
    for (std::uint64_t bits = 0; bits < (1ull << slots.size()); ++bits) {
      LevelMapping candidate = result;
      for (const std::string& pred : scc) {
        if (is_builtin_pred(pred) || !p.modes.count(pred)) continue;
        candidate.entries[pred] = LevelMapping::Entry{
            std::vector<long long>(p.mode_of(pred).arity(), 0), 0};
      }
      for (std::size_t s = 0; s < slots.size(); ++s)
        if (bits & (1ull << s))
          candidate.entries[slots[s].first].coeffs[slots[s].second] = 1;
      if (scc_pairs_proven(p, candidate, g, preds)) {
        result = candidate;
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  return result;
}

TheoremReport prove_input_termination(const ModedProgram& p,
                                      const ModedProgram& r,
                                      bool r_input_terminating,
                                      const LevelMapping& l) {
  TheoremReport report;
  if (!extends(p, r))
    report.failed_hypotheses.push_back("extends: a relation defined in the "
                                       "program occurs in the base");
  if (!r_input_terminating)
    report.failed_hypotheses.push_back("base program is not input terminating");

  ModedProgram normalized = p;
  ModednessReport nm = check_nicely_moded(p);
  if (!nm.holds) {
    bool all_permuted = true;
    for (int ci = 0; ci < static_cast<int>(p.clauses.size()); ++ci) {
      auto perm = find_permutation(p.clauses[ci], p,
                                   ModednessClass::NicelyModed);
      if (!perm) {
        all_permuted = false;
        break;
      }
      bool identity = true;
      for (std::size_t k = 0; k < perm->size(); ++k)
        if ((*perm)[k] != static_cast<int>(k)) identity = false;
      if (identity) continue;
      std::vector<Atom> body;
      for (int idx : *perm) body.push_back(p.clauses[ci].body[idx]);
      normalized.clauses[ci].body = std::move(body);
      report.permutations[ci] = *perm;
    }
    if (all_permuted && check_nicely_moded(normalized).holds) {
      report.used_permutation = true;
      report.note = "bodies reordered to a nicely moded form";
    } else {
      report.failed_hypotheses.push_back(
          "program is not nicely moded (no body permutation makes it so)");
      normalized = p;
    }
  }

  DepGraph g = build_dep_graph(normalized);
  report.qr = check_quasi_recurrent(normalized, l, g);
  report.mapping = l;
  if (!report.qr.all_proven())
    report.failed_hypotheses.push_back(
        "program is not quasi-recurrent under the given level mapping");
  report.proven = report.failed_hypotheses.empty();
  return report;
}

TheoremReport prove_input_termination(const ModedProgram& p,
                                      const LevelMapping& l) {
  return prove_input_termination(p, ModedProgram{}, true, l);
}

namespace {

Term random_ground_term(std::mt19937_64& rng, int max_depth) {
  std::uniform_int_distribution<int> small(0, 9);
  std::uniform_int_distribution<int> kind(0, 3);
  switch (kind(rng)) {
    case 0:
      return Term::integer(small(rng));
    case 1:
      return Term::constant(std::string(1, static_cast<char>('a' + small(rng) % 4)));
    default: {
      std::uniform_int_distribution<int> len(0, std::max(0, max_depth));
      int n = len(rng);
      std::vector<Term> elems;
      for (int i = 0; i < n; ++i) elems.push_back(Term::integer(small(rng)));
      return Term::list(elems);
    }
  }
}

}  // namespace

ProbeReport necessity_probe(const ModedProgram& p, const DepGraph& g,
                            int samples_per_pair, int max_depth,
                            std::size_t node_budget, std::uint64_t seed) {
  ProbeReport report;
  if (!check_simply_moded(p).holds)
    report.refused_hypotheses.push_back("simply-moded");
  if (!check_input_recursive(p, g).holds)
    report.refused_hypotheses.push_back("input-recursive");
  if (!report.refused_hypotheses.empty()) {
    report.refused = true;
    return report;
  }
  std::mt19937_64 rng(seed);
  for (int ci = 0; ci < static_cast<int>(p.clauses.size()); ++ci) {
    const Clause& c = p.clauses[ci];
    for (int bi = 0; bi < static_cast<int>(c.body.size()); ++bi) {
      const Atom& b = c.body[bi];
      if (!g.mutual(c.head.pred, b.pred)) continue;
      // Ground the head's input variables; input-recursiveness makes the
      // body atom's inputs ground too.
      VarSet head_in = vars_of(std::span<const Term>(input_args(c.head, p)));
      for (int s = 0; s < samples_per_pair; ++s) {
        Substitution ground;
        for (VarId v : head_in)
          ground.set(v, random_ground_term(rng, max_depth));
        ProbeSample sample;
        sample.clause_index = ci;
        sample.body_index = bi;
        sample.head_instance = apply(ground, c.head);
        sample.body_instance = apply(ground, b);
        sample.head_level = ictree_level(p, sample.head_instance, node_budget);
        sample.body_level = ictree_level(p, sample.body_instance, node_budget);
        if (!sample.head_level || !sample.body_level) {
          ++report.undefined;
        } else {
          sample.decrease = *sample.head_level > *sample.body_level;
          if (!sample.decrease) ++report.violations;
        }
        report.samples.push_back(std::move(sample));
      }
    }
  }
  return report;
}

}  // namespace icterm
