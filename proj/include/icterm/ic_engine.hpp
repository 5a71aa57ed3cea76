#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "icterm/program.hpp"

namespace icterm {

/// Outcome of trying one (atom, clause) pair: the deterministic relevant mgu
/// plus the clause variant actually unified against, or the reason it is not
/// an input-consuming step.
struct IcResolution {
  Substitution mgu;
  Clause renamed_clause;
};
enum class IcFailure { NotUnifiable, NotInputConsuming };
using IcVerdict = std::variant<IcResolution, IcFailure>;

/// Renames `c` apart from `avoid` (which must cover the whole query and all
/// earlier variants) and unifies head with `a`. The step is input-consuming
/// iff the mgu fixes a's input arguments syntactically.
IcVerdict ic_resolvable(const Atom& a, const Clause& c, const VarSet& avoid,
                        const ModedProgram& p);

/// A resolvable (atom, clause) pair of a query; clause_ordinal -1 marks a
/// builtin atom whose decision procedure accepts and succeeds.
struct IcOption {
  int atom_index;
  int clause_ordinal;
  bool operator==(const IcOption&) const = default;
};

/// All input-consuming options of `q`, atom-major then clause order.
std::vector<IcOption> ic_options(const ModedProgram& p, const Query& q,
                                 const VarSet& avoid);

struct DerivationStep {
  Query source;
  int atom_index;
  int clause_ordinal;   // -1: builtin fact
  Clause input_clause;  // the renamed variant used
  Substitution mgu;
  Query resolvent;
  /// genealogy[k] = index in `source` this resolvent atom descends from:
  /// body atoms map to the selected index, the rest to themselves shifted.
  std::vector<int> genealogy;
};

/// Executes one step. Throws std::invalid_argument on an empty query or a
/// pair that is not input-consuming resolvable; extends `avoid` with the
/// variant's variables. With `assert_nicely_moded`, checks that atoms left
/// of the selected one come out syntactically unchanged.
DerivationStep ic_step(const ModedProgram& p, const Query& q, int atom_index,
                       int clause_ordinal, VarSet& avoid,
                       bool assert_nicely_moded = false);

enum class DerivationStatus { Success, Deadlock, Failure, BudgetExhausted };
std::string to_string(DerivationStatus s);

enum class StuckKind { Deadlock, Failure };

/// Classification of a query with no input-consuming step: Deadlock iff some
/// atom unifies with some clause head (or is an insufficiently instantiated
/// builtin), Failure otherwise. Throws std::invalid_argument if a step
/// exists.
StuckKind classify_stuck(const ModedProgram& p, const Query& q);

struct Derivation {
  Query initial;
  std::vector<DerivationStep> steps;
  DerivationStatus status = DerivationStatus::Failure;
  Substitution answer;    // composed mgus restricted to Var(initial); Success
  Substitution composed;  // left-to-right composition of all step mgus
  std::size_t steps_explored = 0;  // across the whole search
  std::size_t backtracks = 0;
  std::size_t length() const { return steps.size(); }
  const Query& final_query() const;
};

struct Budget {
  std::size_t max_steps = 10000;
  std::size_t max_backtracks = 10000;
};

struct SelectionStrategy {
  enum Kind { LeftmostIC, Scripted } kind = LeftmostIC;
  std::vector<int> script;  // atom index per step (Scripted)
  static SelectionStrategy leftmost() { return {LeftmostIC, {}}; }
  static SelectionStrategy scripted(std::vector<int> s) {
    return {Scripted, std::move(s)};
  }
};

/// LeftmostIC selects the leftmost atom with at least one input-consuming
/// option and backtracks chronologically over clause choices (textual
/// order). Returns the first success; otherwise Deadlock if some explored
/// frontier deadlocks (its branch is reported), else Failure, else
/// BudgetExhausted. Scripted runs the fixture's atom choices with the first
/// available clause and no backtracking; an exhausted script reads as
/// BudgetExhausted.
Derivation derive(const ModedProgram& p, const Query& q,
                  const SelectionStrategy& strategy = {}, Budget budget = {});

/// Incremental derivation construction; used by the search, the tree
/// builder, and the randomized property suites.
class DerivationBuilder {
 public:
  DerivationBuilder(const ModedProgram& p, Query initial,
                    bool assert_nicely_moded = false);

  const Query& current() const { return current_; }
  const VarSet& avoid() const { return avoid_; }
  const std::vector<DerivationStep>& steps() const { return steps_; }
  std::vector<IcOption> options() const;
  void step(const IcOption& opt);
  void undo();
  bool done() const { return current_.empty(); }
  /// Snapshot with composed substitution and answer filled in.
  Derivation finish(DerivationStatus status) const;
  /// Initial-query atom index each step's selected atom descends from.
  std::vector<int> root_atoms() const;

 private:
  const ModedProgram& p_;
  Query initial_;
  Query current_;
  VarSet avoid_;
  std::vector<DerivationStep> steps_;
  std::vector<VarSet> avoid_stack_;
  bool assert_nm_;
};

/// Swaps adjacent steps k and k+1 of `d` per the left-switching lemma: step
/// k+1 must select an atom inherited from step k's source query, strictly
/// left of step k's selected atom and untouched by its mgu. Steps after the
/// pair are replayed with the same clause variants. Returns nullopt with
/// `reason` on a pattern mismatch. Requires program and initial query
/// nicely moded.
std::optional<Derivation> left_switch(const ModedProgram& p,
                                      const Derivation& d, std::size_t k,
                                      std::string* reason = nullptr);

/// Repeatedly left-switches until every step descending from the first
/// `split` atoms of the initial query precedes every step descending from
/// the rest. Throws std::invalid_argument when a required switch is
/// rejected (program or query not nicely moded).
Derivation normalize_prefix(const ModedProgram& p, const Derivation& d,
                            std::size_t split);

}  // namespace icterm
