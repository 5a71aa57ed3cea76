#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace icterm {

using VarId = int;
using VarSet = std::set<VarId>;
using VarNames = std::map<VarId, std::string>;

/// First-order term: a variable or a function symbol applied to arguments.
/// Constants are functions of arity 0; integers are constants whose functor
/// is their decimal spelling. Immutable value type, cheap to copy.
class Term {
 public:
  Term() : var_(0) {}

  static Term var(VarId id);
  static Term fun(std::string functor, std::vector<Term> args = {});
  static Term constant(std::string name) { return fun(std::move(name)); }
  static Term integer(long long value);
  static Term nil() { return constant("[]"); }
  static Term cons(Term head, Term tail);
  static Term list(const std::vector<Term>& elems);

  bool is_var() const { return fn_ == nullptr; }
  VarId var_id() const;
  const std::string& functor() const;
  const std::vector<Term>& args() const;
  int arity() const;
  bool is_constant() const { return !is_var() && arity() == 0; }
  std::optional<long long> as_int() const;

  bool operator==(const Term& other) const;
  bool operator!=(const Term& other) const { return !(*this == other); }

 private:
  struct Fn {
    std::string functor;
    std::vector<Term> args;
  };
  std::shared_ptr<const Fn> fn_;  // null: variable
  VarId var_;
};

void collect_vars(const Term& t, VarSet& out);
void collect_vars(std::span<const Term> ts, VarSet& out);
VarSet vars_of(const Term& t);
VarSet vars_of(std::span<const Term> ts);
bool occurs(VarId v, const Term& t);

/// Number of function and constant symbols; variables contribute 0.
std::size_t tsize(const Term& t);
std::size_t tsize(std::span<const Term> ts);

/// No variable occurs twice across the whole sequence.
bool is_linear(std::span<const Term> ts);

/// Finite mapping from variables to terms. Application is simultaneous:
/// bindings are not chased through each other.
class Substitution {
 public:
  Substitution() = default;
  static Substitution of(std::initializer_list<std::pair<VarId, Term>> bs);

  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }
  const std::map<VarId, Term>& bindings() const { return map_; }
  const Term* lookup(VarId v) const;

  /// Adds or replaces a binding; identity bindings are dropped.
  void set(VarId v, Term t);

  Term apply(const Term& t) const;
  std::vector<Term> apply(std::span<const Term> ts) const;

  Substitution restricted_to(const VarSet& keep) const;
  VarSet domain() const;
  VarSet range_vars() const;

  bool operator==(const Substitution& other) const { return map_ == other.map_; }
  bool operator!=(const Substitution& other) const { return !(*this == other); }

 private:
  std::map<VarId, Term> map_;
};

/// compose(a, b): apply a first, then b. Dom = Dom(a) u Dom(b).
Substitution compose(const Substitution& first, const Substitution& then);

/// Martelli-Montanari unification with occurs check. Deterministic: equations
/// are processed left to right, compounds decompose argument-wise, and a
/// variable-variable equation binds the larger id to the smaller. When
/// `keep_fixed` is given and exactly one side of a variable-variable equation
/// lies in it, the other side is bound instead; this never changes
/// unifiability, only which of the equally general unifiers is returned, and
/// guarantees that protected variables stay fixed whenever some unifier fixes
/// them. The result is an idempotent, relevant mgu.
std::optional<Substitution> unify(std::span<const Term> left,
                                  std::span<const Term> right,
                                  const VarSet* keep_fixed = nullptr);
std::optional<Substitution> unify(const Term& left, const Term& right,
                                  const VarSet* keep_fixed = nullptr);

/// Source of fresh variable ids; monotone.
struct VarGen {
  VarId next = 0;
  VarId fresh() { return next++; }
};
VarGen gen_above(const VarSet& avoid);

Term rename(const Term& t, std::map<VarId, VarId>& mapping, VarGen& gen);

/// Variables renamed to 0,1,2,... in first-occurrence order.
Term canonical_term(const Term& t);
std::vector<Term> canonical_terms(std::span<const Term> ts);
bool variant_eq(std::span<const Term> a, std::span<const Term> b);
bool variant_eq(const Term& a, const Term& b);

}  // namespace icterm
