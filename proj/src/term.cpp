#include "icterm/term.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <deque>
#include <stdexcept>

namespace icterm {

Term Term::var(VarId id) {
  Term t;
  t.var_ = id;
  return t;
}

Term Term::fun(std::string functor, std::vector<Term> args) {
  Term t;
  t.fn_ = std::make_shared<const Fn>(Fn{std::move(functor), std::move(args)});
  t.var_ = -1;
  return t;
}

Term Term::integer(long long value) { return fun(std::to_string(value)); }

Term Term::cons(Term head, Term tail) {
  return fun(".", {std::move(head), std::move(tail)});
}

Term Term::list(const std::vector<Term>& elems) {
  Term t = nil();
  for (auto it = elems.rbegin(); it != elems.rend(); ++it) t = cons(*it, t);
  return t;
}

VarId Term::var_id() const {
  assert(is_var());
  return var_;
}

const std::string& Term::functor() const {
  assert(!is_var());
  return fn_->functor;
}

const std::vector<Term>& Term::args() const {
  assert(!is_var());
  return fn_->args;
}

int Term::arity() const { return static_cast<int>(args().size()); }

std::optional<long long> Term::as_int() const {
  if (is_var() || arity() != 0) return std::nullopt;
  const std::string& s = fn_->functor;
  if (s.empty()) return std::nullopt;
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool Term::operator==(const Term& other) const {
  if (is_var() != other.is_var()) return false;
  if (is_var()) return var_ == other.var_;
  if (fn_ == other.fn_) return true;
  return fn_->functor == other.fn_->functor && fn_->args == other.fn_->args;
}

void collect_vars(const Term& t, VarSet& out) {
  if (t.is_var()) {
    out.insert(t.var_id());
    return;
  }
  for (const Term& a : t.args()) collect_vars(a, out);
}

void collect_vars(std::span<const Term> ts, VarSet& out) {
  for (const Term& t : ts) collect_vars(t, out);
}

VarSet vars_of(const Term& t) {
  VarSet out;
  collect_vars(t, out);
  return out;
}

VarSet vars_of(std::span<const Term> ts) {
  VarSet out;
  collect_vars(ts, out);
  return out;
}

bool occurs(VarId v, const Term& t) {
  if (t.is_var()) return t.var_id() == v;
  for (const Term& a : t.args())
    if (occurs(v, a)) return true;
  return false;
}

std::size_t tsize(const Term& t) {
  if (t.is_var()) return 0;
  std::size_t n = 1;
  for (const Term& a : t.args()) n += tsize(a);
  return n;
}

std::size_t tsize(std::span<const Term> ts) {
  std::size_t n = 0;
  for (const Term& t : ts) n += tsize(t);
  return n;
}

bool is_linear(std::span<const Term> ts) {
  VarSet seen;
  // Walk left to right; a repeated variable breaks linearity.
  struct Walk {
    VarSet& seen;
    bool ok = true;
    void go(const Term& t) {
      if (!ok) return;
      if (t.is_var()) {
        if (!seen.insert(t.var_id()).second) ok = false;
        return;
      }
      for (const Term& a : t.args()) go(a);
    }
  } walk{seen};
  for (const Term& t : ts) walk.go(t);
  return walk.ok;
}

Substitution Substitution::of(
    std::initializer_list<std::pair<VarId, Term>> bs) {
  Substitution s;
  for (const auto& [v, t] : bs) s.set(v, t);
  return s;
}

const Term* Substitution::lookup(VarId v) const {
  auto it = map_.find(v);
  return it == map_.end() ? nullptr : &it->second;
}

void Substitution::set(VarId v, Term t) {
  if (t.is_var() && t.var_id() == v) {
    map_.erase(v);
    return;
  }
  map_.insert_or_assign(v, std::move(t));
}

Term Substitution::apply(const Term& t) const {
  if (t.is_var()) {
    const Term* bound = lookup(t.var_id());
    return bound ? *bound : t;
  }
  if (map_.empty()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(apply(a));
    if (args.back() != a) changed = true;
  }
  if (!changed) return t;
  return Term::fun(t.functor(), std::move(args));
}

std::vector<Term> Substitution::apply(std::span<const Term> ts) const {
  std::vector<Term> out;
  out.reserve(ts.size());
  for (const Term& t : ts) out.push_back(apply(t));
  return out;
}

Substitution Substitution::restricted_to(const VarSet& keep) const {
  Substitution out;
  for (const auto& [v, t] : map_)
    if (keep.count(v)) out.map_.emplace(v, t);
  return out;
}

VarSet Substitution::domain() const {
  VarSet out;
  for (const auto& [v, t] : map_) out.insert(v);
  return out;
}

VarSet Substitution::range_vars() const {
  VarSet out;
  for (const auto& [v, t] : map_) collect_vars(t, out);
  return out;
}

Substitution compose(const Substitution& first, const Substitution& then) {
  Substitution out;
  for (const auto& [v, t] : first.bindings()) out.set(v, then.apply(t));
  for (const auto& [v, t] : then.bindings())
    if (!first.lookup(v)) out.set(v, t);
  return out;
}

namespace {

// One var-var binding choice. Prefers keeping protected variables fixed;
// otherwise the fresher (larger id) variable is bound.
std::pair<VarId, VarId> orient(VarId a, VarId b, const VarSet* keep_fixed) {
  if (keep_fixed) {
    bool pa = keep_fixed->count(a) > 0;
    bool pb = keep_fixed->count(b) > 0;
    if (pa != pb) return pa ? std::make_pair(b, a) : std::make_pair(a, b);
  }
  return a > b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

std::optional<Substitution> unify(std::span<const Term> left,
                                  std::span<const Term> right,
                                  const VarSet* keep_fixed) {
  if (left.size() != right.size()) return std::nullopt;
  std::deque<std::pair<Term, Term>> work;
  for (std::size_t i = 0; i < left.size(); ++i)
    work.emplace_back(left[i], right[i]);
  Substitution result;
  while (!work.empty()) {
    Term s = result.apply(work.front().first);
    Term t = result.apply(work.front().second);
    work.pop_front();
    if (s == t) continue;
    if (!s.is_var() && !t.is_var()) {
      if (s.functor() != t.functor() || s.arity() != t.arity())
        return std::nullopt;
      for (std::size_t i = s.args().size(); i-- > 0;)
        work.emplace_front(s.args()[i], t.args()[i]);
      continue;
    }
    if (!s.is_var()) std::swap(s, t);
    VarId v = s.var_id();
    if (t.is_var()) {
      auto [from, to] = orient(v, t.var_id(), keep_fixed);
      Substitution bind;
      bind.set(from, Term::var(to));
      result = compose(result, bind);
      continue;
    }
    if (occurs(v, t)) return std::nullopt;
    Substitution bind;
    bind.set(v, t);
    result = compose(result, bind);
  }
  return result;
}

std::optional<Substitution> unify(const Term& left, const Term& right,
                                  const VarSet* keep_fixed) {
  return unify(std::span<const Term>(&left, 1),
               std::span<const Term>(&right, 1), keep_fixed);
}

VarGen gen_above(const VarSet& avoid) {
  VarGen g;
  if (!avoid.empty()) g.next = *avoid.rbegin() + 1;
  return g;
}

Term rename(const Term& t, std::map<VarId, VarId>& mapping, VarGen& gen) {
  if (t.is_var()) {
    auto it = mapping.find(t.var_id());
    if (it == mapping.end())
      it = mapping.emplace(t.var_id(), gen.fresh()).first;
    return Term::var(it->second);
  }
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const Term& a : t.args()) args.push_back(rename(a, mapping, gen));
  return Term::fun(t.functor(), std::move(args));
}

Term canonical_term(const Term& t) {
  std::map<VarId, VarId> mapping;
  VarGen gen;
  return rename(t, mapping, gen);
}

std::vector<Term> canonical_terms(std::span<const Term> ts) {
  std::map<VarId, VarId> mapping;
  VarGen gen;
  std::vector<Term> out;
  out.reserve(ts.size());
  for (const Term& t : ts) out.push_back(rename(t, mapping, gen));
  return out;
}

bool variant_eq(std::span<const Term> a, std::span<const Term> b) {
  return canonical_terms(a) == canonical_terms(b);
}

bool variant_eq(const Term& a, const Term& b) {
  return canonical_term(a) == canonical_term(b);
}

}  // namespace icterm
