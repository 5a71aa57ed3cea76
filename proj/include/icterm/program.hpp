#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "icterm/term.hpp"

namespace icterm {

enum class Flow { In, Out };

/// Mode declaration for one predicate symbol; fixes its arity.
struct Mode {
  std::string pred;
  std::vector<Flow> flows;
  int arity() const { return static_cast<int>(flows.size()); }
  bool operator==(const Mode&) const = default;
};

struct Atom {
  std::string pred;
  std::vector<Term> args;
  int arity() const { return static_cast<int>(args.size()); }
  bool operator==(const Atom&) const = default;
};

using Query = std::vector<Atom>;

struct Clause {
  Atom head;
  std::vector<Atom> body;
  bool is_unit() const { return body.empty(); }
  bool operator==(const Clause&) const = default;
};

/// Level mapping annotation as written in source: one coefficient per input
/// position, `_` (nullopt) at output positions, plus an additive constant.
struct LevelAnnotation {
  std::string pred;
  std::vector<std::optional<long long>> coeffs;
  long long constant = 0;
  bool operator==(const LevelAnnotation&) const = default;
};

/// Builtins are decision procedures over sufficiently instantiated
/// arguments; they never bind caller variables.
enum class BuiltinVerdict { True, False, NotDecidable };
bool is_builtin_pred(const std::string& pred);
const Mode* builtin_mode(const std::string& pred);
const std::vector<Mode>& builtin_modes();
BuiltinVerdict eval_builtin(const Atom& a);

/// A parsed program: clauses in textual order plus the mode table.
/// Every predicate occurring anywhere has exactly one mode.
struct ModedProgram {
  std::vector<Clause> clauses;
  std::map<std::string, Mode> modes;
  std::map<std::string, LevelAnnotation> level_annotations;
  VarNames var_names;  // display names for parsed variables
  VarId next_var = 0;  // all parsed variable ids are below this

  bool declares(const std::string& pred) const { return modes.count(pred) > 0; }
  const Mode& mode_of(const std::string& pred) const;
  bool is_builtin(const std::string& pred) const { return is_builtin_pred(pred); }
  std::set<std::string> defined_preds() const;  // predicates with a clause head
};

std::vector<Term> input_args(const Atom& a, const Mode& m);
std::vector<Term> output_args(const Atom& a, const Mode& m);
std::vector<Term> input_args(const Atom& a, const ModedProgram& p);
std::vector<Term> output_args(const Atom& a, const ModedProgram& p);

VarSet vars_of(const Atom& a);
VarSet vars_of(const Query& q);
VarSet vars_of(const Clause& c);
void collect_vars(const Atom& a, VarSet& out);
void collect_vars(const Query& q, VarSet& out);

Atom apply(const Substitution& s, const Atom& a);
Query apply(const Substitution& s, const Query& q);
Clause apply(const Substitution& s, const Clause& c);

Atom rename(const Atom& a, std::map<VarId, VarId>& mapping, VarGen& gen);
Query rename(const Query& q, std::map<VarId, VarId>& mapping, VarGen& gen);
Clause rename(const Clause& c, std::map<VarId, VarId>& mapping, VarGen& gen);

/// Variant of `c` sharing no variable with `avoid`; fresh variables are
/// assigned in first-occurrence order starting above both sets.
Clause rename_apart(const Clause& c, const VarSet& avoid);
Query rename_apart(const Query& q, const VarSet& avoid);
Clause rename_apart(const Clause& c, VarGen& gen);

Atom canonical(const Atom& a);
Query canonical(const Query& q);
Clause canonical(const Clause& c);
bool variant_eq(const Atom& a, const Atom& b);
bool variant_eq(const Query& a, const Query& b);
bool variant_eq(const Clause& a, const Clause& b);

/// Rendering. Lists print with bracket sugar, comparison builtins infix.
/// Unnamed variables print as _G<id>.
std::string to_string(const Term& t, const VarNames* names = nullptr);
std::string to_string(const Atom& a, const VarNames* names = nullptr);
std::string to_string(const Query& q, const VarNames* names = nullptr);
std::string to_string(const Clause& c, const VarNames* names = nullptr);
std::string to_string(const Substitution& s, const VarNames* names = nullptr);
std::string to_string(Flow f);
std::string to_string(const Mode& m);

/// Parseable text for the whole program, declarations first.
std::string print_program(const ModedProgram& p);

}  // namespace icterm
