#pragma once

// Shared test fixtures: term shorthands, program/query loaders, randomized
// query and derivation generators over the bundled corpus, and comparisons
// up to renaming of fresh variables.

#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "icterm/corpus.hpp"
#include "icterm/ic_engine.hpp"
#include "icterm/parser.hpp"
#include "icterm/program.hpp"
#include "icterm/term.hpp"

namespace icterm::testing {

// ---- term shorthands ----

inline Term V(VarId id) { return Term::var(id); }
inline Term C(const std::string& name) { return Term::constant(name); }
inline Term I(long long n) { return Term::integer(n); }
inline Term F(const std::string& f, std::vector<Term> args) {
  return Term::fun(f, std::move(args));
}
inline Term L(const std::vector<Term>& elems) { return Term::list(elems); }
inline Term L(const std::vector<Term>& elems, Term tail) {
  Term t = std::move(tail);
  for (auto it = elems.rbegin(); it != elems.rend(); ++it)
    t = Term::cons(*it, t);
  return t;
}

// ---- loading ----

inline ModedProgram load(const std::string& source) {
  ProgramParse pp = parse_program(source);
  if (!pp.ok())
    throw std::runtime_error("test program does not parse: " +
                             pp.errors.front().render());
  return *pp.program;
}

inline ModedProgram load_corpus(const std::string& name) {
  return load_entry(corpus_entry(name));
}

struct ParsedQuery {
  Query query;
  QueryParse parse;
  ModedProgram program;  // program with the query's default modes merged
};

inline ParsedQuery parse_q(const std::string& text, const ModedProgram& p) {
  QueryParse qp = parse_query(text, p);
  if (!qp.ok())
    throw std::runtime_error("test query does not parse: " +
                             qp.errors.front().render());
  Query q = *qp.query;
  return {std::move(q), qp, with_query_modes(p, qp)};
}

inline VarId vid(const VarNames& names, const std::string& display) {
  for (const auto& [id, n] : names)
    if (n == display) return id;
  throw std::out_of_range("no variable named " + display);
}

inline std::string name_of(const VarNames& names, VarId id) {
  auto it = names.find(id);
  return it == names.end() ? "_G" + std::to_string(id) : it->second;
}

// ---- structural helpers ----

inline std::size_t occurrences(VarId v, const Term& t) {
  if (t.is_var()) return t.var_id() == v ? 1 : 0;
  std::size_t n = 0;
  for (const Term& s : t.args()) n += occurrences(v, s);
  return n;
}

inline VarSet input_vars(const Query& q, const ModedProgram& p) {
  VarSet out;
  for (const Atom& a : q) {
    std::vector<Term> ts = input_args(a, p);
    collect_vars(std::span<const Term>(ts), out);
  }
  return out;
}

inline VarSet output_vars(const Query& q, const ModedProgram& p) {
  VarSet out;
  for (const Atom& a : q) {
    std::vector<Term> ts = output_args(a, p);
    collect_vars(std::span<const Term>(ts), out);
  }
  return out;
}

// Initial-query atom each step's selected atom descends from, recovered by
// walking the genealogy maps backwards.
inline std::vector<int> root_atoms(const Derivation& d) {
  std::vector<int> roots;
  roots.reserve(d.steps.size());
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    int idx = d.steps[i].atom_index;
    for (std::size_t j = i; j-- > 0;) idx = d.steps[j].genealogy[idx];
    roots.push_back(idx);
  }
  return roots;
}

// ---- equality up to renaming with pinned variables ----

// Renames every non-pinned variable to a fresh id at or above `start` in
// first-occurrence order; pinned variables stay themselves. Two queries are
// equal up to a bijective renaming of their non-pinned variables iff their
// canonical forms (built with a common `start`) coincide.
inline Query canon_fixing(const Query& q, const VarSet& pinned, VarId start) {
  std::map<VarId, VarId> mapping;
  for (VarId v : pinned) mapping[v] = v;
  VarGen gen{start};
  Query out;
  out.reserve(q.size());
  for (const Atom& a : q) out.push_back(rename(a, mapping, gen));
  return out;
}

inline bool equal_fixing(const Query& a, const Query& b, const VarSet& pinned) {
  VarSet all = pinned;
  collect_vars(a, all);
  collect_vars(b, all);
  VarId start = all.empty() ? 0 : *all.rbegin() + 1;
  return canon_fixing(a, pinned, start) == canon_fixing(b, pinned, start);
}

// ---- randomness ----

using Rng = std::mt19937_64;

inline long long rand_int(Rng& rng, long long lo, long long hi) {
  return std::uniform_int_distribution<long long>(lo, hi)(rng);
}

inline Term rand_int_list(Rng& rng, int len) {
  std::vector<Term> xs;
  xs.reserve(len);
  for (int i = 0; i < len; ++i) xs.push_back(I(rand_int(rng, 0, 9)));
  return Term::list(xs);
}

// Ground list mixing constants and nested sublists, flatten-style.
inline Term rand_nested_list(Rng& rng, int len, int depth) {
  static const char* consts[] = {"a", "b", "c", "d"};
  std::vector<Term> xs;
  xs.reserve(len);
  for (int i = 0; i < len; ++i) {
    if (depth > 0 && rand_int(rng, 0, 2) == 0)
      xs.push_back(rand_nested_list(rng, static_cast<int>(rand_int(rng, 0, 2)),
                                    depth - 1));
    else
      xs.push_back(C(consts[rand_int(rng, 0, 3)]));
  }
  return Term::list(xs);
}

// Random general term over a small variable pool, for unification and
// substitution properties.
inline Term rand_term(Rng& rng, int depth, int max_var) {
  long long kind = rand_int(rng, 0, depth > 0 ? 4 : 1);
  switch (kind) {
    case 0:
      return V(static_cast<VarId>(rand_int(rng, 0, max_var)));
    case 1: {
      static const char* consts[] = {"a", "b", "[]", "0", "1"};
      return C(consts[rand_int(rng, 0, 4)]);
    }
    case 2:
      return F("f", {rand_term(rng, depth - 1, max_var)});
    case 3:
      return F("g", {rand_term(rng, depth - 1, max_var),
                     rand_term(rng, depth - 1, max_var)});
    default:
      return Term::cons(rand_term(rng, depth - 1, max_var),
                        rand_term(rng, depth - 1, max_var));
  }
}

inline Substitution rand_substitution(Rng& rng, int max_var) {
  Substitution s;
  long long n = rand_int(rng, 0, 3);
  for (long long i = 0; i < n; ++i) {
    VarId v = static_cast<VarId>(rand_int(rng, 0, max_var));
    Term t = rand_term(rng, 2, max_var);
    if (!occurs(v, t)) s.set(v, t);
  }
  return s;
}

// The corpus programs whose textual clause order is already nicely moded;
// the randomized derivation suites draw from these.
inline const std::vector<std::string>& nicely_moded_entries() {
  static const std::vector<std::string> names = {
      "append", "reverse",  "last_original", "last_transformed",
      "merge",  "flatten",  "quicksort",     "pxa"};
  return names;
}

// Random nicely- and simply-moded query for one of the bundled programs:
// ground inputs, fresh distinct output variables; later atoms may consume
// an earlier atom's output (producer strictly left of consumer).
inline Query random_query(const std::string& entry, Rng& rng, VarGen& gen) {
  auto fresh = [&] { return V(gen.fresh()); };
  Query q;
  if (entry == "append") {
    long long n = rand_int(rng, 1, 3);
    std::optional<Term> chain;
    for (long long i = 0; i < n; ++i) {
      Term a = chain && rand_int(rng, 0, 1)
                   ? *chain
                   : rand_int_list(rng, static_cast<int>(rand_int(rng, 0, 3)));
      Term out = fresh();
      q.push_back({"app",
                   {a, rand_int_list(rng, static_cast<int>(rand_int(rng, 0, 2))),
                    out}});
      chain = out;
    }
  } else if (entry == "reverse") {
    long long n = rand_int(rng, 1, 2);
    std::optional<Term> chain;
    for (long long i = 0; i < n; ++i) {
      Term a = chain ? *chain
                     : rand_int_list(rng, static_cast<int>(rand_int(rng, 0, 4)));
      Term out = fresh();
      q.push_back({"reverse", {a, out}});
      chain = out;
    }
  } else if (entry == "merge") {
    long long n = rand_int(rng, 1, 2);
    std::optional<Term> chain;
    for (long long i = 0; i < n; ++i) {
      Term a = chain && rand_int(rng, 0, 1)
                   ? *chain
                   : rand_int_list(rng, static_cast<int>(rand_int(rng, 0, 3)));
      Term out = fresh();
      q.push_back({"merge",
                   {a, rand_int_list(rng, static_cast<int>(rand_int(rng, 0, 2))),
                    out}});
      chain = out;
    }
  } else if (entry == "flatten") {
    long long n = rand_int(rng, 1, 2);
    std::optional<Term> chain;
    for (long long i = 0; i < n; ++i) {
      Term a = chain ? *chain
                     : rand_nested_list(
                           rng, static_cast<int>(rand_int(rng, 0, 2)), 1);
      Term out = fresh();
      q.push_back({"flatten", {a, out}});
      chain = out;
    }
  } else if (entry == "quicksort") {
    long long n = rand_int(rng, 1, 2);
    std::optional<Term> chain;
    for (long long i = 0; i < n; ++i) {
      Term a = chain ? *chain
                     : rand_int_list(rng, static_cast<int>(rand_int(rng, 0, 3)));
      Term out = fresh();
      q.push_back({"qs", {a, out}});
      chain = out;
    }
  } else if (entry == "last_original" || entry == "last_transformed") {
    q.push_back({"last",
                 {rand_int_list(rng, static_cast<int>(rand_int(rng, 1, 4))),
                  fresh()}});
  } else if (entry == "pxa") {
    long long n = rand_int(rng, 1, 2);
    std::optional<Term> chain;
    for (long long i = 0; i < n; ++i) {
      Term a = chain ? *chain : C("c");
      Term out = fresh();
      q.push_back({"p", {a, out}});
      chain = out;
    }
  } else {
    throw std::out_of_range("no random queries for entry " + entry);
  }
  return q;
}

// Runs a derivation choosing uniformly among the input-consuming options,
// invoking `per_step` after each executed step.
template <typename PerStep>
Derivation random_derivation(const ModedProgram& p, const Query& q, Rng& rng,
                             std::size_t max_steps, PerStep&& per_step) {
  DerivationBuilder b(p, q);
  while (!b.done() && b.steps().size() < max_steps) {
    std::vector<IcOption> opts = b.options();
    if (opts.empty()) break;
    const IcOption& pick =
        opts[rand_int(rng, 0, static_cast<long long>(opts.size()) - 1)];
    b.step(pick);
    per_step(b);
  }
  return b.finish(b.done() ? DerivationStatus::Success
                           : DerivationStatus::BudgetExhausted);
}

inline Derivation random_derivation(const ModedProgram& p, const Query& q,
                                    Rng& rng, std::size_t max_steps = 64) {
  return random_derivation(p, q, rng, max_steps,
                           [](const DerivationBuilder&) {});
}

}  // namespace icterm::testing
