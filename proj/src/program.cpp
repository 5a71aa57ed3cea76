#include "icterm/program.hpp"

#include <sstream>
#include <stdexcept>

namespace icterm {

namespace {

const std::vector<Mode>& builtin_mode_table() {
  static const std::vector<Mode> table = {
      {"<", {Flow::In, Flow::In}},
      {">", {Flow::In, Flow::In}},
      {"=<", {Flow::In, Flow::In}},
      {"\\=", {Flow::In, Flow::In}},
      {"constant", {Flow::In}},
  };
  return table;
}

bool is_ground(const Term& t) {
  if (t.is_var()) return false;
  for (const Term& a : t.args())
    if (!is_ground(a)) return false;
  return true;
}

}  // namespace

bool is_builtin_pred(const std::string& pred) {
  return builtin_mode(pred) != nullptr;
}

const Mode* builtin_mode(const std::string& pred) {
  for (const Mode& m : builtin_mode_table())
    if (m.pred == pred) return &m;
  return nullptr;
}

const std::vector<Mode>& builtin_modes() { return builtin_mode_table(); }

BuiltinVerdict eval_builtin(const Atom& a) {
  if (a.pred == "constant") {
    if (a.args.size() != 1 || a.args[0].is_var())
      return BuiltinVerdict::NotDecidable;
    return a.args[0].is_constant() ? BuiltinVerdict::True
                                   : BuiltinVerdict::False;
  }
  if (a.pred == "\\=") {
    if (a.args.size() != 2 || !is_ground(a.args[0]) || !is_ground(a.args[1]))
      return BuiltinVerdict::NotDecidable;
    return a.args[0] != a.args[1] ? BuiltinVerdict::True
                                  : BuiltinVerdict::False;
  }
  if (a.pred == "<" || a.pred == ">" || a.pred == "=<") {
    if (a.args.size() != 2) return BuiltinVerdict::NotDecidable;
    // The comparison relations are sets of ground facts over the integers;
    // a non-integer ground argument matches no fact, an unbound one matches
    // too many to stay input-consuming.
    if (a.args[0].is_var() || a.args[1].is_var())
      return BuiltinVerdict::NotDecidable;
    auto l = a.args[0].as_int();
    auto r = a.args[1].as_int();
    if (!l || !r)
      return is_ground(a.args[0]) && is_ground(a.args[1])
                 ? BuiltinVerdict::False
                 : BuiltinVerdict::NotDecidable;
    bool holds = a.pred == "<" ? *l < *r : a.pred == ">" ? *l > *r : *l <= *r;
    return holds ? BuiltinVerdict::True : BuiltinVerdict::False;
  }
  throw std::invalid_argument("not a builtin: " + a.pred);
}

const Mode& ModedProgram::mode_of(const std::string& pred) const {
  auto it = modes.find(pred);
  if (it != modes.end()) return it->second;
  const Mode* b = builtin_mode(pred);
  if (b) return *b;
  throw std::invalid_argument("no mode for predicate " + pred);
}

std::set<std::string> ModedProgram::defined_preds() const {
  std::set<std::string> out;
  for (const Clause& c : clauses) out.insert(c.head.pred);
  return out;
}

std::vector<Term> input_args(const Atom& a, const Mode& m) {
  std::vector<Term> out;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (m.flows[i] == Flow::In) out.push_back(a.args[i]);
  return out;
}

std::vector<Term> output_args(const Atom& a, const Mode& m) {
  std::vector<Term> out;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (m.flows[i] == Flow::Out) out.push_back(a.args[i]);
  return out;
}

std::vector<Term> input_args(const Atom& a, const ModedProgram& p) {
  return input_args(a, p.mode_of(a.pred));
}

std::vector<Term> output_args(const Atom& a, const ModedProgram& p) {
  return output_args(a, p.mode_of(a.pred));
}

void collect_vars(const Atom& a, VarSet& out) { collect_vars(std::span<const Term>(a.args), out); }

void collect_vars(const Query& q, VarSet& out) {
  for (const Atom& a : q) collect_vars(a, out);
}

VarSet vars_of(const Atom& a) {
  VarSet out;
  collect_vars(a, out);
  return out;
}

VarSet vars_of(const Query& q) {
  VarSet out;
  collect_vars(q, out);
  return out;
}

VarSet vars_of(const Clause& c) {
  VarSet out;
  collect_vars(c.head, out);
  for (const Atom& a : c.body) collect_vars(a, out);
  return out;
}

Atom apply(const Substitution& s, const Atom& a) {
  return Atom{a.pred, s.apply(std::span<const Term>(a.args))};
}

Query apply(const Substitution& s, const Query& q) {
  Query out;
  out.reserve(q.size());
  for (const Atom& a : q) out.push_back(apply(s, a));
  return out;
}

Clause apply(const Substitution& s, const Clause& c) {
  Clause out;
  out.head = apply(s, c.head);
  out.body.reserve(c.body.size());
  for (const Atom& a : c.body) out.body.push_back(apply(s, a));
  return out;
}

Atom rename(const Atom& a, std::map<VarId, VarId>& mapping, VarGen& gen) {
  Atom out;
  out.pred = a.pred;
  out.args.reserve(a.args.size());
  for (const Term& t : a.args) out.args.push_back(rename(t, mapping, gen));
  return out;
}

Query rename(const Query& q, std::map<VarId, VarId>& mapping, VarGen& gen) {
  Query out;
  out.reserve(q.size());
  for (const Atom& a : q) out.push_back(rename(a, mapping, gen));
  return out;
}

Clause rename(const Clause& c, std::map<VarId, VarId>& mapping, VarGen& gen) {
  Clause out;
  out.head = rename(c.head, mapping, gen);
  out.body.reserve(c.body.size());
  for (const Atom& a : c.body) out.body.push_back(rename(a, mapping, gen));
  return out;
}

Clause rename_apart(const Clause& c, const VarSet& avoid) {
  VarSet all = avoid;
  VarSet own = vars_of(c);
  all.insert(own.begin(), own.end());
  VarGen gen = gen_above(all);
  return rename_apart(c, gen);
}

Clause rename_apart(const Clause& c, VarGen& gen) {
  std::map<VarId, VarId> mapping;
  return rename(c, mapping, gen);
}

Query rename_apart(const Query& q, const VarSet& avoid) {
  VarSet all = avoid;
  VarSet own = vars_of(q);
  all.insert(own.begin(), own.end());
  VarGen gen = gen_above(all);
  std::map<VarId, VarId> mapping;
  return rename(q, mapping, gen);
}

Atom canonical(const Atom& a) {
  std::map<VarId, VarId> mapping;
  VarGen gen;
  return rename(a, mapping, gen);
}

Query canonical(const Query& q) {
  std::map<VarId, VarId> mapping;
  VarGen gen;
  return rename(q, mapping, gen);
}

Clause canonical(const Clause& c) {
  std::map<VarId, VarId> mapping;
  VarGen gen;
  return rename(c, mapping, gen);
}

bool variant_eq(const Atom& a, const Atom& b) { return canonical(a) == canonical(b); }
bool variant_eq(const Query& a, const Query& b) { return canonical(a) == canonical(b); }
bool variant_eq(const Clause& a, const Clause& b) { return canonical(a) == canonical(b); }

namespace {

void render_term(const Term& t, const VarNames* names, std::ostream& os) {
  if (t.is_var()) {
    if (names) {
      auto it = names->find(t.var_id());
      if (it != names->end()) {
        os << it->second;
        return;
      }
    }
    os << "_G" << t.var_id();
    return;
  }
  if (t.functor() == "[]" && t.arity() == 0) {
    os << "[]";
    return;
  }
  if (t.functor() == "." && t.arity() == 2) {
    os << '[';
    render_term(t.args()[0], names, os);
    Term rest = t.args()[1];
    while (!rest.is_var() && rest.functor() == "." && rest.arity() == 2) {
      os << ',';
      render_term(rest.args()[0], names, os);
      rest = rest.args()[1];
    }
    if (rest.is_var() || rest.functor() != "[]" || rest.arity() != 0) {
      os << '|';
      render_term(rest, names, os);
    }
    os << ']';
    return;
  }
  os << t.functor();
  if (t.arity() > 0) {
    os << '(';
    for (int i = 0; i < t.arity(); ++i) {
      if (i) os << ',';
      render_term(t.args()[i], names, os);
    }
    os << ')';
  }
}

void render_atom(const Atom& a, const VarNames* names, std::ostream& os) {
  if (is_builtin_pred(a.pred) && a.pred != "constant" && a.args.size() == 2) {
    render_term(a.args[0], names, os);
    os << ' ' << a.pred << ' ';
    render_term(a.args[1], names, os);
    return;
  }
  os << a.pred;
  if (!a.args.empty()) {
    os << '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i) os << ',';
      render_term(a.args[i], names, os);
    }
    os << ')';
  }
}

}  // namespace

std::string to_string(const Term& t, const VarNames* names) {
  std::ostringstream os;
  render_term(t, names, os);
  return os.str();
}

std::string to_string(const Atom& a, const VarNames* names) {
  std::ostringstream os;
  render_atom(a, names, os);
  return os.str();
}

std::string to_string(const Query& q, const VarNames* names) {
  if (q.empty()) return "[]";  // the empty query
  std::ostringstream os;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (i) os << ", ";
    render_atom(q[i], names, os);
  }
  return os.str();
}

std::string to_string(const Clause& c, const VarNames* names) {
  std::ostringstream os;
  render_atom(c.head, names, os);
  if (!c.body.empty()) {
    os << " :- ";
    for (std::size_t i = 0; i < c.body.size(); ++i) {
      if (i) os << ", ";
      render_atom(c.body[i], names, os);
    }
  }
  os << '.';
  return os.str();
}

std::string to_string(const Substitution& s, const VarNames* names) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& [v, t] : s.bindings()) {
    if (!first) os << ", ";
    first = false;
    os << to_string(Term::var(v), names) << '/' << to_string(t, names);
  }
  os << '}';
  return os.str();
}

std::string to_string(Flow f) { return f == Flow::In ? "in" : "out"; }

std::string to_string(const Mode& m) {
  std::ostringstream os;
  os << m.pred << '(';
  for (std::size_t i = 0; i < m.flows.size(); ++i) {
    if (i) os << ',';
    os << to_string(m.flows[i]);
  }
  os << ')';
  return os.str();
}

std::string print_program(const ModedProgram& p) {
  std::ostringstream os;
  for (const auto& [pred, mode] : p.modes) {
    if (is_builtin_pred(pred) && builtin_mode(pred)->flows == mode.flows)
      continue;  // implicit
    os << ":- mode " << to_string(mode) << ".\n";
  }
  for (const auto& [pred, ann] : p.level_annotations) {
    os << ":- level " << pred << '(';
    for (std::size_t i = 0; i < ann.coeffs.size(); ++i) {
      if (i) os << ',';
      if (ann.coeffs[i])
        os << *ann.coeffs[i];
      else
        os << '_';
    }
    os << ") + " << ann.constant << ".\n";
  }
  for (const Clause& c : p.clauses) os << to_string(c, &p.var_names) << '\n';
  return os.str();
}

}  // namespace icterm
