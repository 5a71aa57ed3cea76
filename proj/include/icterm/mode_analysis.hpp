#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "icterm/program.hpp"

namespace icterm {

enum class ModednessClass { NicelyModed, SimplyModed };

/// Leftmost violation under a left-to-right, condition-ordered scan.
/// atom_index -1 denotes the clause head; producer_index is the atom whose
/// output side participates in the clash (when meaningful).
struct ModednessWitness {
  std::string condition;  // "outputs-not-linear" | "input-meets-later-output"
                          // | "head-input-meets-body-output"
                          // | "output-not-variable" | "recursive-input-escapes"
  VarId variable = -1;
  int atom_index = -1;
  int producer_index = -1;
  std::string detail;
};

struct ModednessReport {
  bool holds = false;
  std::optional<ModednessWitness> witness;
  std::optional<int> clause_index;  // program-level checks: failing clause
};

ModednessReport check_nicely_moded(const Query& q, const ModedProgram& p);
ModednessReport check_nicely_moded(const Clause& c, const ModedProgram& p);
ModednessReport check_nicely_moded(const ModedProgram& p);
ModednessReport check_simply_moded(const Query& q, const ModedProgram& p);
ModednessReport check_simply_moded(const Clause& c, const ModedProgram& p);
ModednessReport check_simply_moded(const ModedProgram& p);

/// Predicate dependency structure of a program: refers-to edges, their
/// reflexive-transitive closure, and the derived equivalence/order.
class DepGraph {
 public:
  const std::vector<std::string>& preds() const { return preds_; }
  bool refers_to(const std::string& p, const std::string& q) const;
  bool depends(const std::string& p, const std::string& q) const;  // p >= q
  bool mutual(const std::string& p, const std::string& q) const;   // p ~ q
  bool strict(const std::string& p, const std::string& q) const;   // p > q
  /// Number of predicates defined in the program that p depends on.
  int dep(const std::string& p) const;
  /// Strongly connected components, callers before callees.
  const std::vector<std::vector<std::string>>& sccs() const { return sccs_; }

 private:
  friend DepGraph build_dep_graph(const ModedProgram& p);
  int index(const std::string& p) const;
  std::vector<std::string> preds_;
  std::map<std::string, int> id_;
  std::vector<std::vector<bool>> edge_;
  std::vector<std::vector<bool>> closure_;  // reflexive-transitive
  std::vector<bool> defined_;
  std::vector<std::vector<std::string>> sccs_;
};

DepGraph build_dep_graph(const ModedProgram& p);

/// Heads of mutually recursive calls keep their input variables: for every
/// clause H :- ...,B,... with Rel(H) ~ Rel(B), Var(In(B)) is contained in
/// Var(In(H)).
ModednessReport check_input_recursive(const ModedProgram& p, const DepGraph& g);

struct BodyTooLongError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Body-atom order (original indices, 0-based) making the query or clause
/// body fall into `target`; identity when it already does; nullopt when no
/// order works. Deterministic: smallest original index first among the
/// admissible atoms. Bodies longer than 8 atoms are refused.
std::optional<std::vector<int>> find_permutation(const Query& q,
                                                 const ModedProgram& p,
                                                 ModednessClass target);
std::optional<std::vector<int>> find_permutation(const Clause& c,
                                                 const ModedProgram& p,
                                                 ModednessClass target);

/// No relation defined in `p` occurs in `r` (head or body).
bool extends(const ModedProgram& p, const ModedProgram& r);

}  // namespace icterm
