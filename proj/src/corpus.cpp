#include "icterm/corpus.hpp"

#include <chrono>
#include <future>
#include <sstream>
#include <stdexcept>

#include "icterm/ic_tree.hpp"
#include "icterm/mode_analysis.hpp"
#include "icterm/termination.hpp"

namespace icterm {

namespace {

std::vector<CorpusEntry> make_corpus() {
  std::vector<CorpusEntry> v;

  {
    CorpusEntry e;
    e.name = "append";
    e.main_mode = "app(In,In,Out)";
    e.source = R"(:- mode app(In, In, Out).
:- level app(1, 0, _) + 0.

app([], Ys, Ys).
app([H|Xs], Ys, [H|Zs]) :- app(Xs, Ys, Zs).
)";
    e.nm = e.sm = e.ir = true;
    e.qr = true;
    e.it = true;
    e.queries = {
        {"app(X, Y, Z)", DerivationStatus::Deadlock, ""},
        {"app(f(a), Y, Z)", DerivationStatus::Failure, ""},
        {"app([1,2], [3,4], Zs)", DerivationStatus::Success, "{Zs/[1,2,3,4]}"},
        {"app([1,2], [3,4], Xs), app(Xs, [5,6], Ys)", DerivationStatus::Success,
         "{Xs/[1,2,3,4], Ys/[1,2,3,4,5,6]}"},
        {"app(Xs, [5,6], Ys), app([1,2], [3,4], Xs)", DerivationStatus::Success,
         "{Xs/[1,2,3,4], Ys/[1,2,3,4,5,6]}"},
    };
    e.trees = {
        {"app(X, Y, Z)", 1},
        {"app([], [], Z)", 2},
        {"app([1], [2], Z)", 3},
        {"app([1,2,3,4], [5,6], Zs)", std::nullopt},
    };
    v.push_back(std::move(e));
  }

  {
    CorpusEntry e;
    e.name = "reverse";
    e.main_mode = "reverse(In,Out)";
    e.source = R"(:- mode reverse(In, Out).
:- mode reverse_acc(In, Out, In).
:- level reverse(1, _) + 0.
:- level reverse_acc(1, _, 0) + 0.

reverse(Xs, Ys) :- reverse_acc(Xs, Ys, []).
reverse_acc([], Ys, Ys).
reverse_acc([X|Xs], Ys, Zs) :- reverse_acc(Xs, Ys, [X|Zs]).
)";
    e.nm = e.sm = e.ir = true;
    e.qr = true;
    e.it = true;
    e.queries = {
        {"reverse([X1,X2], Zs)", DerivationStatus::Success, "{Zs/[X2,X1]}"},
        {"reverse([1,2,3], Ys)", DerivationStatus::Success, "{Ys/[3,2,1]}"},
        {"reverse(Xs, Ys)", DerivationStatus::Deadlock, ""},
    };
    e.trees = {
        {"reverse([1,2,3,4], Ys)", std::nullopt},
    };
    v.push_back(std::move(e));
  }

  {
    CorpusEntry e;
    e.name = "last_original";
    e.main_mode = "last(In,Out)";
    e.source = R"(:- mode last(In, Out).
:- mode reverse(In, Out).
:- mode reverse_acc(In, Out, In).
:- level reverse(1, _) + 0.
:- level reverse_acc(1, _, 0) + 0.

last(Ls, E) :- reverse(Ls, [E|_]).

reverse(Xs, Ys) :- reverse_acc(Xs, Ys, []).
reverse_acc([], Ys, Ys).
reverse_acc([X|Xs], Ys, Zs) :- reverse_acc(Xs, Ys, [X|Zs]).
)";
    e.nm = true;
    e.sm = false;  // the body output [E|_] is not a variable
    e.ir = true;
    e.qr = true;
    e.it = true;
    e.queries = {
        {"last([1,2], E)", DerivationStatus::Success, "{E/2}"},
        {"last(Ls, E)", DerivationStatus::Deadlock, ""},
    };
    e.trees = {
        {"last([1,2,3], E)", std::nullopt},
    };
    v.push_back(std::move(e));
  }

  {
    CorpusEntry e;
    e.name = "last_transformed";
    e.main_mode = "last(In,Out)";
    e.source = R"(:- mode last(In, Out).
:- mode selectfirst(In, Out).
:- mode reverse(In, Out).
:- mode reverse_acc(In, Out, In).
:- level reverse(1, _) + 0.
:- level reverse_acc(1, _, 0) + 0.

last(Ls, E) :- reverse(Ls, Rs), selectfirst(Rs, E).
selectfirst([E|_], E).

reverse(Xs, Ys) :- reverse_acc(Xs, Ys, []).
reverse_acc([], Ys, Ys).
reverse_acc([X|Xs], Ys, Zs) :- reverse_acc(Xs, Ys, [X|Zs]).
)";
    e.nm = e.sm = e.ir = true;
    e.qr = true;
    e.it = true;
    e.queries = {
        {"last([1,2], E)", DerivationStatus::Success, "{E/2}"},
        {"last(Ls, E)", DerivationStatus::Deadlock, ""},
    };
    v.push_back(std::move(e));
  }

  {
    CorpusEntry e;
    e.name = "merge";
    e.main_mode = "merge(In,In,Out)";
    e.source = R"(:- mode merge(In, In, Out).
:- level merge(1, 1, _) + 0.

merge(Xs, [], Xs).
merge([], Xs, Xs).
merge([X|Xs], [Y|Ys], [Y|Zs]) :- Y < X, merge([X|Xs], Ys, Zs).
merge([X|Xs], [Y|Ys], [X|Zs]) :- Y > X, merge(Xs, [Y|Ys], Zs).
merge([X|Xs], [X|Ys], [X|Zs]) :- merge(Xs, [X|Ys], Zs).
)";
    e.nm = e.sm = e.ir = true;
    e.qr = true;
    e.it = true;
    e.queries = {
        {"merge([1,3], [2], Zs)", DerivationStatus::Success, "{Zs/[1,2,3]}"},
        {"merge([], [], Zs)", DerivationStatus::Success, "{Zs/[]}"},
        {"merge([f(a)], [b], Zs)", DerivationStatus::Failure, ""},
        {"merge(Xs, [2], Zs)", DerivationStatus::Deadlock, ""},
    };
    e.trees = {
        {"merge([1], [2], W)", 8},
        {"merge([1,3], [2,4], W)", std::nullopt},
    };
    v.push_back(std::move(e));
  }

  {
    CorpusEntry e;
    e.name = "flatten";
    e.main_mode = "flatten(In,Out)";
    e.source = R"(:- mode flatten(In, Out).
:- mode flatten_dl(In, Out, In).
:- level flatten(1, _) + 0.
:- level flatten_dl(1, _, 0) + 0.

flatten(Xs, Ys) :- flatten_dl(Xs, Ys, []).

flatten_dl([], Ys, Ys).
flatten_dl(X, [X|Xs], Xs) :- constant(X), X \= [].
flatten_dl([X|Xs], Ys, Zs) :- flatten_dl(Xs, Y1s, Zs), flatten_dl(X, Ys, Y1s).
)";
    e.nm = e.sm = true;
    e.ir = false;  // Y1s feeds the second recursive call's input
    e.qr = true;
    e.it = true;
    e.queries = {
        {"flatten([a,[b],c], Ys)", DerivationStatus::Success, "{Ys/[a,b,c]}"},
        {"flatten([], Ys)", DerivationStatus::Success, "{Ys/[]}"},
        {"flatten(X, Ys)", DerivationStatus::Deadlock, ""},
    };
    e.trees = {
        {"flatten([a], Ys)", std::nullopt},
        {"flatten([a,b], Ys)", std::nullopt},
        {"flatten([[a]], Ys)", std::nullopt},
    };
    v.push_back(std::move(e));
  }

  {
    CorpusEntry e;
    e.name = "flatten_apt";
    e.main_mode = "flatten(In,Out)";
    e.source = R"(:- mode flatten(In, Out).
:- mode flatten_dl(In, Out, In).
:- level flatten(1, _) + 0.
:- level flatten_dl(1, _, 0) + 0.

flatten(Xs, Ys) :- flatten_dl(Xs, Ys, []).

flatten_dl([], Ys, Ys).
flatten_dl(X, [X|Xs], Xs) :- constant(X), X \= [].
flatten_dl([X|Xs], Ys, Zs) :- flatten_dl(X, Ys, Y1s), flatten_dl(Xs, Y1s, Zs).
)";
    e.nm = e.sm = false;  // Y1s is consumed before it is produced
    e.perm_nm = true;
    e.perm_sm = true;
    e.ir = false;
    e.qr = true;  // quasi-recurrency ignores body order
    e.it = true;
    e.queries = {
        {"flatten([a,[b],c], Ys)", DerivationStatus::Success, "{Ys/[a,b,c]}"},
        {"flatten(X, Ys)", DerivationStatus::Deadlock, ""},
    };
    v.push_back(std::move(e));
  }

  {
    CorpusEntry e;
    e.name = "quicksort";
    e.main_mode = "qs(In,Out)";
    e.source = R"(:- mode qs(In, Out).
:- mode part(In, In, Out, Out).
:- mode app(In, In, Out).

qs([], []).
qs([X|Xs], Ys) :-
    part(X, Xs, Littles, Bigs),
    qs(Littles, Ls),
    qs(Bigs, Bs),
    app(Ls, [X|Bs], Ys).

part(X, [], [], []).
part(X, [Y|Xs], [Y|Ls], Bs) :- X > Y, part(X, Xs, Ls, Bs).
part(X, [Y|Xs], Ls, [Y|Bs]) :- X =< Y, part(X, Xs, Ls, Bs).

app([], Ys, Ys).
app([H|Xs], Ys, [H|Zs]) :- app(Xs, Ys, Zs).
)";
    e.nm = e.sm = true;
    e.ir = false;  // qs(Littles,_) takes its input from part's output
    e.qr = false;  // no {0,1} mapping decreases into the recursive qs calls
    e.it = true;
    e.queries = {
        {"qs([3,1,2], Ys)", DerivationStatus::Success, "{Ys/[1,2,3]}"},
        {"qs([], Ys)", DerivationStatus::Success, "{Ys/[]}"},
        {"qs(X, Ys)", DerivationStatus::Deadlock, ""},
    };
    e.trees = {
        {"qs([2,1], Ys)", std::nullopt},
    };
    v.push_back(std::move(e));
  }

  {
    CorpusEntry e;
    e.name = "pxa";
    e.main_mode = "p(In,Out)";
    e.source = R"(:- mode p(In, Out).

p(X, a) :- p(X, b).
p(X, b).
)";
    e.nm = true;
    e.sm = false;  // the body output b is not a variable
    e.ir = true;
    e.qr = false;  // p(X,a) and p(X,b) agree on every moded level mapping
    e.it = true;
    e.queries = {
        {"p(X, W)", DerivationStatus::Success, "{W/a}"},
        {"p(c, W)", DerivationStatus::Success, "{W/a}"},
    };
    e.trees = {
        {"p(c, W)", std::nullopt},
    };
    v.push_back(std::move(e));
  }

  return v;
}

std::string yn(bool b) { return b ? "yes" : "no"; }

VarNames merged_names(const VarNames& a, const VarNames& b) {
  VarNames n = a;
  n.insert(b.begin(), b.end());
  return n;
}

/// Bodies reordered into `target` form; nullopt when some clause has no
/// admissible order.
std::optional<ModedProgram> permuted(const ModedProgram& p,
                                     ModednessClass target) {
  ModedProgram q = p;
  for (std::size_t ci = 0; ci < p.clauses.size(); ++ci) {
    auto perm = find_permutation(p.clauses[ci], p, target);
    if (!perm) return std::nullopt;
    std::vector<Atom> body;
    for (int idx : *perm) body.push_back(p.clauses[ci].body[idx]);
    q.clauses[ci].body = std::move(body);
  }
  return q;
}

}  // namespace

const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries = make_corpus();
  return entries;
}

const CorpusEntry& corpus_entry(const std::string& name) {
  for (const CorpusEntry& e : corpus())
    if (e.name == name) return e;
  throw std::out_of_range("no corpus entry named " + name);
}

ModedProgram load_entry(const CorpusEntry& e) {
  ProgramParse pp = parse_program(e.source);
  if (!pp.ok())
    throw std::runtime_error("corpus entry " + e.name +
                             " does not parse: " + pp.errors.front().render());
  return *pp.program;
}

ModedProgram with_query_modes(const ModedProgram& p, const QueryParse& qp) {
  ModedProgram q = p;
  for (const auto& [pred, mode] : qp.extra_modes) q.modes.emplace(pred, mode);
  q.next_var = qp.next_var;
  return q;
}

EntryResult check_entry(const CorpusEntry& e) {
  auto start = std::chrono::steady_clock::now();
  EntryResult r;
  r.name = e.name;
  auto expect = [&r](const std::string& what, bool want, bool got) {
    if (want != got)
      r.diffs.push_back(what + ": expected " + yn(want) + ", got " + yn(got));
  };

  ProgramParse pp = parse_program(e.source);
  if (!pp.ok()) {
    for (const ParseError& err : pp.errors) r.diffs.push_back(err.render());
    r.ok = false;
    return r;
  }
  const ModedProgram& p = *pp.program;

  expect("nicely-moded", e.nm, check_nicely_moded(p).holds);
  expect("simply-moded", e.sm, check_simply_moded(p).holds);
  DepGraph g = build_dep_graph(p);
  expect("input-recursive", e.ir, check_input_recursive(p, g).holds);

  if (e.perm_nm) {
    auto q = permuted(p, ModednessClass::NicelyModed);
    expect("permutation-nicely-moded", *e.perm_nm,
           q && check_nicely_moded(*q).holds);
  }
  if (e.perm_sm) {
    auto q = permuted(p, ModednessClass::SimplyModed);
    expect("permutation-simply-moded", *e.perm_sm,
           q && check_simply_moded(*q).holds);
  }

  if (e.qr) {
    bool got;
    if (!p.level_annotations.empty()) {
      got = check_quasi_recurrent(p, from_annotations(p), g).all_proven();
    } else {
      got = infer_level_mapping(p, g).has_value();
    }
    expect("quasi-recurrent", *e.qr, got);
  }

  for (const QueryCase& qc : e.queries) {
    QueryParse qp = parse_query(qc.query, p);
    if (!qp.ok()) {
      r.diffs.push_back("query " + qc.query + ": " +
                        qp.errors.front().render());
      continue;
    }
    ModedProgram pq = with_query_modes(p, qp);
    Derivation d = derive(pq, *qp.query);
    if (d.status != qc.expected) {
      r.diffs.push_back("query " + qc.query + ": expected " +
                        to_string(qc.expected) + ", got " +
                        to_string(d.status));
      continue;
    }
    VarNames names = merged_names(p.var_names, qp.names);
    std::string answer = to_string(d.answer, &names);
    if (d.status == DerivationStatus::Success && !qc.expected_answer.empty() &&
        answer != qc.expected_answer) {
      r.diffs.push_back("query " + qc.query + ": expected answer " +
                        qc.expected_answer + ", got " + answer);
      continue;
    }
    std::string line = "query " + qc.query + ": " + to_string(d.status);
    if (d.status == DerivationStatus::Success) line += " " + answer;
    r.notes.push_back(line);
  }

  for (const TreeCase& tc : e.trees) {
    QueryParse qp = parse_query(tc.query, p);
    if (!qp.ok()) {
      r.diffs.push_back("tree " + tc.query + ": " +
                        qp.errors.front().render());
      continue;
    }
    ModedProgram pq = with_query_modes(p, qp);
    IcTree t = build_ic_tree(pq, *qp.query);
    if (!t.complete) {
      r.diffs.push_back("tree " + tc.query + ": budget cut at " +
                        std::to_string(t.size()) + " nodes");
      continue;
    }
    if (tc.expected_nodes && t.size() != *tc.expected_nodes) {
      r.diffs.push_back("tree " + tc.query + ": expected " +
                        std::to_string(*tc.expected_nodes) + " nodes, got " +
                        std::to_string(t.size()));
      continue;
    }
    r.notes.push_back("tree " + tc.query + ": " + std::to_string(t.size()) +
                      " nodes, complete");
  }

  r.notes.push_back("input termination (reference): " + yn(e.it));
  r.ok = r.diffs.empty();
  auto end = std::chrono::steady_clock::now();
  r.millis =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(
          end - start)
          .count();
  return r;
}

bool CorpusResult::all_ok() const {
  for (const EntryResult& e : entries)
    if (!e.ok) return false;
  return true;
}

CorpusResult run_corpus(const std::string& filter) {
  std::vector<const CorpusEntry*> selected;
  for (const CorpusEntry& e : corpus())
    if (filter.empty() || e.name.find(filter) != std::string::npos)
      selected.push_back(&e);

  std::vector<std::future<EntryResult>> futures;
  futures.reserve(selected.size());
  for (const CorpusEntry* e : selected)
    futures.push_back(std::async(std::launch::async,
                                 [e] { return check_entry(*e); }));

  CorpusResult result;
  for (auto& f : futures) result.entries.push_back(f.get());
  return result;
}

}  // namespace icterm
