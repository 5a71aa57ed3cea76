#include "icterm/ic_engine.hpp"

#include <algorithm>
#include <stdexcept>

#include "icterm/mode_analysis.hpp"

namespace icterm {

namespace {

bool fixes_inputs(const Substitution& mgu, const Atom& a,
                  const ModedProgram& p) {
  std::vector<Term> in = input_args(a, p);
  return mgu.apply(std::span<const Term>(in)) == in;
}

std::vector<int> make_genealogy(std::size_t source_size, int atom_index,
                                std::size_t body_size) {
  std::vector<int> g;
  g.reserve(source_size - 1 + body_size);
  for (int k = 0; k < atom_index; ++k) g.push_back(k);
  for (std::size_t k = 0; k < body_size; ++k) g.push_back(atom_index);
  for (std::size_t k = atom_index + 1; k < source_size; ++k)
    g.push_back(static_cast<int>(k));
  return g;
}

}  // namespace

IcVerdict ic_resolvable(const Atom& a, const Clause& c, const VarSet& avoid,
                        const ModedProgram& p) {
  if (a.pred != c.head.pred || a.arity() != c.head.arity())
    return IcFailure::NotUnifiable;
  VarSet all = avoid;
  VarSet own = vars_of(a);
  all.insert(own.begin(), own.end());
  Clause variant = rename_apart(c, all);
  VarSet protect = vars_of(std::span<const Term>(input_args(a, p)));
  auto mgu = unify(std::span<const Term>(a.args),
                   std::span<const Term>(variant.head.args), &protect);
  if (!mgu) return IcFailure::NotUnifiable;
  if (!fixes_inputs(*mgu, a, p)) return IcFailure::NotInputConsuming;
  return IcResolution{std::move(*mgu), std::move(variant)};
}

std::vector<IcOption> ic_options(const ModedProgram& p, const Query& q,
                                 const VarSet& avoid) {
  std::vector<IcOption> out;
  for (int i = 0; i < static_cast<int>(q.size()); ++i) {
    const Atom& a = q[i];
    if (p.is_builtin(a.pred)) {
      if (eval_builtin(a) == BuiltinVerdict::True) out.push_back({i, -1});
      continue;
    }
    for (int j = 0; j < static_cast<int>(p.clauses.size()); ++j)
      if (std::holds_alternative<IcResolution>(
              ic_resolvable(a, p.clauses[j], avoid, p)))
        out.push_back({i, j});
  }
  return out;
}

namespace {

/// Step with an explicitly supplied clause variant (already variable
/// disjoint); the replay path of left_switch. Returns nullopt when the pair
/// does not resolve input-consumingly.
std::optional<DerivationStep> step_with_variant(const ModedProgram& p,
                                                const Query& q, int atom_index,
                                                int clause_ordinal,
                                                const Clause& variant) {
  if (atom_index < 0 || atom_index >= static_cast<int>(q.size()))
    return std::nullopt;
  const Atom& a = q[atom_index];
  DerivationStep s;
  s.source = q;
  s.atom_index = atom_index;
  s.clause_ordinal = clause_ordinal;
  if (clause_ordinal < 0) {
    if (!p.is_builtin(a.pred) || eval_builtin(a) != BuiltinVerdict::True)
      return std::nullopt;
    s.input_clause = Clause{a, {}};
  } else {
    if (a.pred != variant.head.pred || a.arity() != variant.head.arity())
      return std::nullopt;
    VarSet protect = vars_of(std::span<const Term>(input_args(a, p)));
    auto mgu = unify(std::span<const Term>(a.args),
                     std::span<const Term>(variant.head.args), &protect);
    if (!mgu || !fixes_inputs(*mgu, a, p)) return std::nullopt;
    s.mgu = std::move(*mgu);
    s.input_clause = variant;
  }
  Query next;
  next.reserve(q.size() - 1 + s.input_clause.body.size());
  for (int k = 0; k < atom_index; ++k) next.push_back(q[k]);
  for (const Atom& b : s.input_clause.body) next.push_back(b);
  for (std::size_t k = atom_index + 1; k < q.size(); ++k) next.push_back(q[k]);
  s.resolvent = icterm::apply(s.mgu, next);  // qualified: ADL would see std::apply
  s.genealogy =
      make_genealogy(q.size(), atom_index, s.input_clause.body.size());
  return s;
}

}  // namespace

DerivationStep ic_step(const ModedProgram& p, const Query& q, int atom_index,
                       int clause_ordinal, VarSet& avoid,
                       bool assert_nicely_moded) {
  if (q.empty())
    throw std::invalid_argument("ic_step: cannot step on the empty query");
  if (atom_index < 0 || atom_index >= static_cast<int>(q.size()))
    throw std::invalid_argument("ic_step: atom index out of range");
  const Atom& a = q[atom_index];
  DerivationStep s;
  if (clause_ordinal < 0) {
    if (!p.is_builtin(a.pred))
      throw std::invalid_argument("ic_step: " + a.pred + " is not a builtin");
    if (eval_builtin(a) != BuiltinVerdict::True)
      throw std::invalid_argument(
          "ic_step: builtin atom does not accept: " + to_string(a));
    auto step = step_with_variant(p, q, atom_index, -1, Clause{});
    s = std::move(*step);
  } else {
    if (clause_ordinal >= static_cast<int>(p.clauses.size()))
      throw std::invalid_argument("ic_step: clause ordinal out of range");
    IcVerdict v = ic_resolvable(a, p.clauses[clause_ordinal], avoid, p);
    if (std::holds_alternative<IcFailure>(v))
      throw std::invalid_argument(
          std::get<IcFailure>(v) == IcFailure::NotUnifiable
              ? "ic_step: atom does not unify with the clause head"
              : "ic_step: step would instantiate input arguments");
    IcResolution& r = std::get<IcResolution>(v);
    auto step =
        step_with_variant(p, q, atom_index, clause_ordinal, r.renamed_clause);
    if (!step) throw std::logic_error("ic_step: variant replay failed");
    s = std::move(*step);
  }
  // The defining property, re-checked on every executed step.
  if (!fixes_inputs(s.mgu, a, p))
    throw std::logic_error("ic_step: input arguments were instantiated");
  if (assert_nicely_moded) {
    for (int k = 0; k < atom_index; ++k)
      if (s.resolvent[k] != q[k])
        throw std::logic_error(
            "ic_step: atom left of the selected one changed under a nicely "
            "moded query");
  }
  VarSet vs = vars_of(s.input_clause);
  avoid.insert(vs.begin(), vs.end());
  return s;
}

std::string to_string(DerivationStatus s) {
  switch (s) {
    case DerivationStatus::Success: return "success";
    case DerivationStatus::Deadlock: return "deadlock";
    case DerivationStatus::Failure: return "failure";
    case DerivationStatus::BudgetExhausted: return "budget-exhausted";
  }
  return "?";
}

StuckKind classify_stuck(const ModedProgram& p, const Query& q) {
  if (!ic_options(p, q, vars_of(q)).empty())
    throw std::invalid_argument(
        "classify_stuck: query has an input-consuming step");
  for (const Atom& a : q) {
    if (p.is_builtin(a.pred)) {
      if (eval_builtin(a) == BuiltinVerdict::NotDecidable)
        return StuckKind::Deadlock;
      continue;
    }
    VarSet avoid = vars_of(q);
    for (const Clause& c : p.clauses) {
      if (a.pred != c.head.pred || a.arity() != c.head.arity()) continue;
      Clause variant = rename_apart(c, avoid);
      if (unify(std::span<const Term>(a.args),
                std::span<const Term>(variant.head.args)))
        return StuckKind::Deadlock;
    }
  }
  return StuckKind::Failure;
}

const Query& Derivation::final_query() const {
  return steps.empty() ? initial : steps.back().resolvent;
}

DerivationBuilder::DerivationBuilder(const ModedProgram& p, Query initial,
                                     bool assert_nicely_moded)
    : p_(p),
      initial_(std::move(initial)),
      current_(initial_),
      avoid_(vars_of(initial_)),
      assert_nm_(assert_nicely_moded) {}

std::vector<IcOption> DerivationBuilder::options() const {
  return ic_options(p_, current_, avoid_);
}

void DerivationBuilder::step(const IcOption& opt) {
  avoid_stack_.push_back(avoid_);
  steps_.push_back(ic_step(p_, current_, opt.atom_index, opt.clause_ordinal,
                           avoid_, assert_nm_));
  current_ = steps_.back().resolvent;
}

void DerivationBuilder::undo() {
  if (steps_.empty()) throw std::logic_error("undo without a step");
  steps_.pop_back();
  avoid_ = avoid_stack_.back();
  avoid_stack_.pop_back();
  current_ = steps_.empty() ? initial_ : steps_.back().resolvent;
}

Derivation DerivationBuilder::finish(DerivationStatus status) const {
  Derivation d;
  d.initial = initial_;
  d.steps = steps_;
  d.status = status;
  for (const DerivationStep& s : steps_) d.composed = compose(d.composed, s.mgu);
  if (status == DerivationStatus::Success)
    d.answer = d.composed.restricted_to(vars_of(initial_));
  d.steps_explored = steps_.size();
  return d;
}

namespace {

std::vector<int> roots_of_steps(const Query& initial,
                                const std::vector<DerivationStep>& steps) {
  std::vector<int> pos(initial.size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<int>(i);
  std::vector<int> out;
  out.reserve(steps.size());
  for (const DerivationStep& s : steps) {
    out.push_back(pos[s.atom_index]);
    std::vector<int> next(s.genealogy.size());
    for (std::size_t k = 0; k < s.genealogy.size(); ++k)
      next[k] = pos[s.genealogy[k]];
    pos = std::move(next);
  }
  return out;
}

}  // namespace

std::vector<int> DerivationBuilder::root_atoms() const {
  return roots_of_steps(initial_, steps_);
}

namespace {

Derivation derivation_from_steps(const Query& initial,
                                 std::vector<DerivationStep> steps,
                                 DerivationStatus status,
                                 std::size_t explored, std::size_t backtracks) {
  Derivation d;
  d.initial = initial;
  d.steps = std::move(steps);
  d.status = status;
  for (const DerivationStep& s : d.steps) d.composed = compose(d.composed, s.mgu);
  if (status == DerivationStatus::Success)
    d.answer = d.composed.restricted_to(vars_of(initial));
  d.steps_explored = explored;
  d.backtracks = backtracks;
  return d;
}

Derivation derive_leftmost(const ModedProgram& p, const Query& q,
                           Budget budget) {
  DerivationBuilder b(p, q);
  struct Frame {
    std::vector<IcOption> opts;
    std::size_t next;
  };
  std::vector<Frame> frames;
  std::size_t explored = 0, backtracks = 0;
  std::optional<std::vector<DerivationStep>> deadlock_trace, failure_trace;

  auto take = [&](Frame& f) -> bool {  // false: budget exhausted
    if (explored >= budget.max_steps) return false;
    b.step(f.opts[f.next]);
    ++explored;
    return true;
  };

  for (;;) {
    if (b.done())
      return derivation_from_steps(q, b.steps(), DerivationStatus::Success,
                                   explored, backtracks);
    std::vector<IcOption> opts = b.options();
    if (!opts.empty()) {
      // Leftmost resolvable atom only; clause choices are the backtrack
      // points.
      int leftmost = opts.front().atom_index;
      std::erase_if(opts, [&](const IcOption& o) {
        return o.atom_index != leftmost;
      });
      frames.push_back({std::move(opts), 0});
      if (!take(frames.back()))
        return derivation_from_steps(q, b.steps(),
                                     DerivationStatus::BudgetExhausted,
                                     explored, backtracks);
      continue;
    }
    StuckKind kind = classify_stuck(p, b.current());
    if (kind == StuckKind::Deadlock && !deadlock_trace)
      deadlock_trace = b.steps();
    if (kind == StuckKind::Failure && !failure_trace) failure_trace = b.steps();
    // Chronological backtracking over clause choices.
    bool resumed = false;
    while (!frames.empty()) {
      b.undo();
      if (++backtracks > budget.max_backtracks)
        return derivation_from_steps(q, b.steps(),
                                     DerivationStatus::BudgetExhausted,
                                     explored, backtracks);
      Frame& f = frames.back();
      if (++f.next < f.opts.size()) {
        if (!take(f))
          return derivation_from_steps(q, b.steps(),
                                       DerivationStatus::BudgetExhausted,
                                       explored, backtracks);
        resumed = true;
        break;
      }
      frames.pop_back();
    }
    if (resumed) continue;
    if (deadlock_trace)
      return derivation_from_steps(q, std::move(*deadlock_trace),
                                   DerivationStatus::Deadlock, explored,
                                   backtracks);
    return derivation_from_steps(q, std::move(*failure_trace),
                                 DerivationStatus::Failure, explored,
                                 backtracks);
  }
}

Derivation derive_scripted(const ModedProgram& p, const Query& q,
                           const std::vector<int>& script) {
  DerivationBuilder b(p, q);
  for (int idx : script) {
    if (b.done()) break;
    std::vector<IcOption> opts = b.options();
    if (opts.empty()) {
      StuckKind kind = classify_stuck(p, b.current());
      return b.finish(kind == StuckKind::Deadlock ? DerivationStatus::Deadlock
                                                  : DerivationStatus::Failure);
    }
    auto it = std::find_if(opts.begin(), opts.end(), [&](const IcOption& o) {
      return o.atom_index == idx;
    });
    if (it == opts.end())
      throw std::invalid_argument(
          "scripted selection: atom " + std::to_string(idx) +
          " is not input-consuming resolvable");
    b.step(*it);
  }
  if (b.done()) return b.finish(DerivationStatus::Success);
  if (b.options().empty()) {
    StuckKind kind = classify_stuck(p, b.current());
    return b.finish(kind == StuckKind::Deadlock ? DerivationStatus::Deadlock
                                                : DerivationStatus::Failure);
  }
  return b.finish(DerivationStatus::BudgetExhausted);
}

}  // namespace

Derivation derive(const ModedProgram& p, const Query& q,
                  const SelectionStrategy& strategy, Budget budget) {
  if (strategy.kind == SelectionStrategy::Scripted)
    return derive_scripted(p, q, strategy.script);
  return derive_leftmost(p, q, budget);
}

std::optional<Derivation> left_switch(const ModedProgram& p,
                                      const Derivation& d, std::size_t k,
                                      std::string* reason) {
  auto mismatch = [&](const std::string& why) -> std::optional<Derivation> {
    if (reason) *reason = why;
    return std::nullopt;
  };
  if (!check_nicely_moded(p).holds)
    return mismatch("program is not nicely moded");
  if (!check_nicely_moded(d.initial, p).holds)
    return mismatch("initial query is not nicely moded");
  if (k + 1 >= d.steps.size())
    return mismatch("no adjacent step pair at index " + std::to_string(k));
  const DerivationStep& s1 = d.steps[k];
  const DerivationStep& s2 = d.steps[k + 1];
  int i = s1.atom_index;
  int j = s2.atom_index;
  int m1 = static_cast<int>(s1.input_clause.body.size());
  if (j >= i && j < i + m1)
    return mismatch("second step resolves an atom introduced by the first");
  if (j >= i + m1)
    return mismatch("second step's atom is not left of the first's");
  if (s1.source[j] != s2.source[j])
    return mismatch("second step's atom was instantiated by the first step");

  std::vector<DerivationStep> steps(d.steps.begin(), d.steps.begin() + k);
  auto stepA =
      step_with_variant(p, s1.source, j, s2.clause_ordinal, s2.input_clause);
  if (!stepA) return mismatch("switched pair is no longer resolvable");
  steps.push_back(std::move(*stepA));
  int m2 = static_cast<int>(s2.input_clause.body.size());
  auto stepB = step_with_variant(p, steps.back().resolvent, i + m2 - 1,
                                 s1.clause_ordinal, s1.input_clause);
  if (!stepB) return mismatch("switched pair lost input consumption");
  steps.push_back(std::move(*stepB));
  for (std::size_t t = k + 2; t < d.steps.size(); ++t) {
    auto replay =
        step_with_variant(p, steps.back().resolvent, d.steps[t].atom_index,
                          d.steps[t].clause_ordinal, d.steps[t].input_clause);
    if (!replay)
      return mismatch("replay of step " + std::to_string(t) + " failed");
    steps.push_back(std::move(*replay));
  }
  DerivationStatus status = steps.back().resolvent.empty()
                                ? DerivationStatus::Success
                                : d.status;
  return derivation_from_steps(d.initial, std::move(steps), status,
                               d.steps.size(), 0);
}

Derivation normalize_prefix(const ModedProgram& p, const Derivation& d,
                            std::size_t split) {
  if (split > d.initial.size())
    throw std::invalid_argument("normalize_prefix: split out of range");
  Derivation cur = d;
  for (;;) {
    std::vector<int> roots = roots_of_steps(cur.initial, cur.steps);
    std::size_t t = 0;
    bool switched = false;
    for (; t + 1 < roots.size(); ++t) {
      if (roots[t] >= static_cast<int>(split) &&
          roots[t + 1] < static_cast<int>(split)) {
        std::string why;
        auto next = left_switch(p, cur, t, &why);
        if (!next)
          throw std::invalid_argument("normalize_prefix: " + why);
        cur = std::move(*next);
        switched = true;
        break;
      }
    }
    if (!switched) return cur;
  }
}

}  // namespace icterm
