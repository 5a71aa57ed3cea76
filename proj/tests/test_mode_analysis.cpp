#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "icterm/mode_analysis.hpp"

using namespace icterm;
using namespace icterm::testing;

namespace {

// Exhaustive reference for find_permutation: tries every body order.
std::optional<std::vector<int>> brute_force_permutation(
    const Query& q, const ModedProgram& p, ModednessClass target) {
  std::vector<int> idx(q.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end());
  do {
    Query r;
    for (int i : idx) r.push_back(q[i]);
    bool ok = target == ModednessClass::NicelyModed
                  ? check_nicely_moded(r, p).holds
                  : check_simply_moded(r, p).holds;
    if (ok) return idx;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return std::nullopt;
}

}  // namespace

TEST_CASE("nicely moded: programs and queries") {
  ModedProgram append = load_corpus("append");
  CHECK(check_nicely_moded(append).holds);

  // Q1 consumes Xs before the atom that produces it.
  ParsedQuery q1 = parse_q("app(Xs,[5,6],Ys), app([1,2],[3,4],Xs)", append);
  ModednessReport r = check_nicely_moded(q1.query, append);
  REQUIRE(!r.holds);
  REQUIRE(r.witness);
  CHECK(r.witness->condition == "input-meets-later-output");
  CHECK(name_of(q1.parse.names, r.witness->variable) == "Xs");
  CHECK(r.witness->atom_index == 0);
  CHECK(r.witness->producer_index == 1);

  // One-atom case: input and output of the same atom share a variable.
  ParsedQuery shared = parse_q("app(X, Y, X)", append);
  ModednessReport s = check_nicely_moded(shared.query, append);
  REQUIRE(!s.holds);
  CHECK(s.witness->condition == "input-meets-later-output");
  CHECK(name_of(shared.parse.names, s.witness->variable) == "X");

  // Unit clauses are nicely moded.
  CHECK(check_nicely_moded(Clause{{"app", {V(0), V(1), V(0)}}, {}}, append)
            .holds);
  CHECK(check_nicely_moded(Query{}, append).holds);
}

TEST_CASE("nicely moded: output linearity and head condition") {
  ModedProgram append = load_corpus("append");
  ParsedQuery dup = parse_q("app([1],[2],X), app([3],[4],X)", append);
  ModednessReport r = check_nicely_moded(dup.query, append);
  REQUIRE(!r.holds);
  CHECK(r.witness->condition == "outputs-not-linear");
  CHECK(r.witness->atom_index == 1);
  CHECK(r.witness->producer_index == 0);

  // A head input fed from a body output violates the clause condition.
  ModedProgram fed = load(
      ":- mode p(in, out).\n"
      ":- mode q(in, out).\n"
      "p(X, Y) :- q(a, X).\n"
      "q(a, b).\n");
  ModednessReport h = check_nicely_moded(fed);
  REQUIRE(!h.holds);
  CHECK(h.witness->condition == "head-input-meets-body-output");
  CHECK(h.clause_index == 0);
  CHECK(h.witness->producer_index == 0);
}

TEST_CASE("simply moded: programs and the LAST counterexample") {
  CHECK(check_simply_moded(load_corpus("reverse")).holds);
  CHECK(check_simply_moded(load_corpus("merge")).holds);
  CHECK(check_simply_moded(load_corpus("flatten")).holds);

  ModedProgram last = load_corpus("last_original");
  ModednessReport r = check_simply_moded(last);
  REQUIRE(!r.holds);
  CHECK(r.clause_index == 0);  // last(Ls,E) :- reverse(Ls,[E|_]).
  CHECK(r.witness->condition == "output-not-variable");
  CHECK(r.witness->detail.find("output term [") != std::string::npos);
  CHECK(r.witness->detail.find("is not a variable") != std::string::npos);

  // The transformed variant fixes it.
  CHECK(check_simply_moded(load_corpus("last_transformed")).holds);

  ModedProgram append = load_corpus("append");
  CHECK(check_simply_moded(Query{}, append).holds);
  ParsedQuery ground_out = parse_q("app([1], [2], [1,2])", append);
  CHECK(!check_simply_moded(ground_out.query, append).holds);
  CHECK(check_nicely_moded(ground_out.query, append).holds);
}

TEST_CASE("input recursive: the corpus classification") {
  for (const char* name : {"append", "reverse", "merge"}) {
    ModedProgram p = load_corpus(name);
    CHECK_MESSAGE(check_input_recursive(p, build_dep_graph(p)).holds, name);
  }

  ModedProgram flatten = load_corpus("flatten");
  ModednessReport f = check_input_recursive(flatten, build_dep_graph(flatten));
  REQUIRE(!f.holds);
  CHECK(f.clause_index == 3);
  CHECK(f.witness->condition == "recursive-input-escapes");
  CHECK(f.witness->atom_index == 1);
  CHECK(name_of(flatten.var_names, f.witness->variable) == "Y1s");

  ModedProgram qs = load_corpus("quicksort");
  ModednessReport q = check_input_recursive(qs, build_dep_graph(qs));
  REQUIRE(!q.holds);
  CHECK(q.clause_index == 1);
  CHECK(q.witness->atom_index == 1);
  CHECK(name_of(qs.var_names, q.witness->variable) == "Littles");
}

TEST_CASE("dependency graph: closure, dep counts, SCC order") {
  ModedProgram qs = load_corpus("quicksort");
  DepGraph g = build_dep_graph(qs);

  CHECK(g.refers_to("qs", "part"));
  CHECK(g.refers_to("qs", "qs"));
  CHECK(g.refers_to("qs", "app"));
  CHECK(!g.refers_to("part", "qs"));
  CHECK(g.refers_to("part", ">"));

  CHECK(g.depends("qs", "app"));
  CHECK(g.depends("qs", "qs"));
  CHECK(!g.depends("app", "qs"));
  CHECK(g.mutual("qs", "qs"));
  CHECK(g.strict("qs", "part"));
  CHECK(g.strict("qs", "app"));
  CHECK(!g.mutual("qs", "part"));

  // dep counts predicates defined in the program only.
  CHECK(g.dep("qs") == 3);
  CHECK(g.dep("part") == 1);
  CHECK(g.dep("app") == 1);
  CHECK(g.dep(">") == 0);

  // Callers come before callees in the SCC order.
  auto scc_of = [&](const std::string& pred) {
    for (std::size_t i = 0; i < g.sccs().size(); ++i)
      for (const std::string& s : g.sccs()[i])
        if (s == pred) return i;
    throw std::out_of_range(pred);
  };
  CHECK(scc_of("qs") < scc_of("part"));
  CHECK(scc_of("qs") < scc_of("app"));
  CHECK(scc_of("part") < scc_of(">"));
  CHECK(scc_of("part") < scc_of("=<"));

  // dep is constant on SCCs and strictly decreasing across strict edges.
  for (const auto& scc : g.sccs()) {
    for (const std::string& a : scc) CHECK(g.dep(a) == g.dep(scc.front()));
  }
  for (const std::string& a : g.preds())
    for (const std::string& b : g.preds())
      if (g.strict(a, b)) CHECK(g.dep(a) > g.dep(b));
}

TEST_CASE("dependency graph: flatten and a single fact") {
  ModedProgram flatten = load_corpus("flatten");
  DepGraph g = build_dep_graph(flatten);
  CHECK(g.strict("flatten", "flatten_dl"));
  CHECK(g.mutual("flatten_dl", "flatten_dl"));
  CHECK(!g.mutual("flatten", "flatten_dl"));

  ModedProgram fact = load("p(a).\n");
  DepGraph h = build_dep_graph(fact);
  CHECK(h.dep("p") == 1);
  CHECK(h.mutual("p", "p"));
  CHECK(h.sccs() == std::vector<std::vector<std::string>>{{"p"}});
}

TEST_CASE("find_permutation: examples") {
  ModedProgram append = load_corpus("append");

  ParsedQuery q1 = parse_q("app(Xs,[5,6],Ys), app([1,2],[3,4],Xs)", append);
  auto perm = find_permutation(q1.query, append, ModednessClass::NicelyModed);
  REQUIRE(perm);
  CHECK(*perm == std::vector<int>{1, 0});

  ParsedQuery chained = parse_q("app([1],[2],X), app(X,[3],Y)", append);
  auto id = find_permutation(chained.query, append,
                             ModednessClass::NicelyModed);
  REQUIRE(id);
  CHECK(*id == std::vector<int>{0, 1});

  ParsedQuery shared = parse_q("app(X, Y, X)", append);
  CHECK(!find_permutation(shared.query, append,
                          ModednessClass::NicelyModed));

  // The out-of-order flatten variant is permutation nicely and simply moded.
  ModedProgram apt = load_corpus("flatten_apt");
  CHECK(!check_nicely_moded(apt).holds);
  for (ModednessClass target :
       {ModednessClass::NicelyModed, ModednessClass::SimplyModed}) {
    auto body = find_permutation(apt.clauses[3], apt, target);
    REQUIRE(body);
    CHECK(*body == std::vector<int>{1, 0});
  }

  Query too_long(9, Atom{"app", {V(0), V(1), V(2)}});
  CHECK_THROWS_AS(
      find_permutation(too_long, append, ModednessClass::NicelyModed),
      BodyTooLongError);
}

TEST_CASE("find_permutation agrees with exhaustive search") {
  ModedProgram p = load(
      ":- mode mk(out).\n"
      ":- mode fwd(in, out).\n"
      ":- mode zip(in, in, out).\n"
      "mk(a).\n"
      "fwd(X, X).\n"
      "zip(X, Y, p(X, Y)).\n");
  Rng rng(20240601);
  int found = 0, missing = 0;
  for (int iter = 0; iter < 150; ++iter) {
    long long n = rand_int(rng, 1, 5);
    Query q;
    for (long long i = 0; i < n; ++i) {
      auto arg = [&] {
        long long k = rand_int(rng, 0, 4);
        return k == 4 ? C("a") : V(static_cast<VarId>(k));
      };
      switch (rand_int(rng, 0, 2)) {
        case 0: q.push_back({"mk", {arg()}}); break;
        case 1: q.push_back({"fwd", {arg(), arg()}}); break;
        default: q.push_back({"zip", {arg(), arg(), arg()}}); break;
      }
    }
    for (ModednessClass target :
         {ModednessClass::NicelyModed, ModednessClass::SimplyModed}) {
      auto fast = find_permutation(q, p, target);
      auto slow = brute_force_permutation(q, p, target);
      CHECK(fast.has_value() == slow.has_value());
      if (!fast) {
        ++missing;
        continue;
      }
      ++found;
      Query reordered;
      for (int i : *fast) reordered.push_back(q[i]);
      bool ok = target == ModednessClass::NicelyModed
                    ? check_nicely_moded(reordered, p).holds
                    : check_simply_moded(reordered, p).holds;
      CHECK(ok);
    }
  }
  CHECK(found > 30);
  CHECK(missing > 30);
}

TEST_CASE("extends: no relation defined in P occurs in R") {
  ModedProgram flatten = load_corpus("flatten");
  ModedProgram append = load_corpus("append");
  ModedProgram empty = load("");

  CHECK(extends(flatten, empty));
  CHECK(extends(empty, append));
  CHECK(!extends(append, append));
  CHECK(extends(flatten, append));
  CHECK(!extends(append, load(":- mode p(in).\np(X) :- app(X, X, X).\n")));
}
