#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "icterm/ic_engine.hpp"
#include "icterm/program.hpp"

namespace icterm {

inline constexpr std::size_t kDefaultNodeBudget = 100000;

/// Tree of all input-consuming derivations of a query: one child per
/// resolvable (atom, clause) pair, in atom-major clause order. Node queries
/// are stored canonically renamed; children from different pairs stay
/// distinct nodes even when variant-equal.
struct IcTree {
  struct Edge {
    int atom_index;
    int clause_ordinal;  // -1: builtin fact
    Substitution mgu;    // restricted to the parent's variables
    int child;
  };
  struct Node {
    Query query;
    int depth = 0;
    std::vector<Edge> children;
  };
  std::vector<Node> nodes;  // index 0 is the root; BFS order
  bool complete = true;
  int max_depth = 0;
  std::size_t size() const { return nodes.size(); }
};

/// BFS expansion; stops marking the tree incomplete once `node_budget`
/// nodes exist.
IcTree build_ic_tree(const ModedProgram& p, const Query& q,
                     std::size_t node_budget = kDefaultNodeBudget);

/// Number of nodes; undefined (nullopt) when the build was cut.
std::optional<std::size_t> nodes_count(const IcTree& t);

/// Output arguments replaced by fresh distinct variables not occurring in
/// the atom.
Atom freshen_outputs(const Atom& a, const ModedProgram& p);

/// Size of the IC-tree of freshen_outputs(a); the moded level used by the
/// necessity probe. Undefined when the budget cuts the build.
std::optional<std::size_t> ictree_level(const ModedProgram& p, const Atom& a,
                                        std::size_t node_budget = kDefaultNodeBudget);

/// Indented text rendering, one node per line with (atom, clause) labels.
std::string render_tree(const IcTree& t);

}  // namespace icterm
