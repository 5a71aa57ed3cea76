#include "icterm/parser.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace icterm {

namespace {

enum class Tok {
  Name,
  Var,
  Int,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Bar,
  Dot,
  ColonDash,
  Plus,
  Cmp,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

struct SyntaxError {
  ParseError err;
};

[[noreturn]] void fail(int line, int col, std::string message) {
  throw SyntaxError{ParseError{line, col, std::move(message)}};
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_layout();
      int line = line_, col = col_;
      if (eof()) {
        out.push_back({Tok::End, "", line, col});
        return out;
      }
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '-' && pos_ + 1 < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        out.push_back({Tok::Int, read_int(), line, col});
      } else if (std::islower(static_cast<unsigned char>(c))) {
        out.push_back({Tok::Name, read_ident(), line, col});
      } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back({Tok::Var, read_ident(), line, col});
      } else if (starts_with(":-")) {
        advance(2);
        out.push_back({Tok::ColonDash, ":-", line, col});
      } else if (starts_with("=<") || starts_with("<=") || starts_with("\\=")) {
        std::string s = text_.substr(pos_, 2);
        advance(2);
        out.push_back({Tok::Cmp, s == "<=" ? "=<" : s, line, col});
      } else if (starts_with("\xe2\x89\xa0")) {  // the one-glyph disequality
        advance(3);
        out.push_back({Tok::Cmp, "\\=", line, col});
      } else if (c == '<' || c == '>') {
        advance(1);
        out.push_back({Tok::Cmp, std::string(1, c), line, col});
      } else {
        advance(1);
        switch (c) {
          case '(': out.push_back({Tok::LParen, "(", line, col}); break;
          case ')': out.push_back({Tok::RParen, ")", line, col}); break;
          case '[': out.push_back({Tok::LBracket, "[", line, col}); break;
          case ']': out.push_back({Tok::RBracket, "]", line, col}); break;
          case ',': out.push_back({Tok::Comma, ",", line, col}); break;
          case '|': out.push_back({Tok::Bar, "|", line, col}); break;
          case '+': out.push_back({Tok::Plus, "+", line, col}); break;
          case '.': out.push_back({Tok::Dot, ".", line, col}); break;
          default:
            fail(line, col,
                 std::string("unexpected character '") + c + "'");
        }
      }
    }
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  bool starts_with(std::string_view s) const {
    return text_.substr(pos_, s.size()) == s;
  }
  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }
  void skip_layout() {
    for (;;) {
      while (!eof() && std::isspace(static_cast<unsigned char>(peek())))
        advance(1);
      if (!eof() && peek() == '%') {
        while (!eof() && peek() != '\n') advance(1);
        continue;
      }
      return;
    }
  }
  std::string read_ident() {
    std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                      peek() == '_'))
      advance(1);
    return std::string(text_.substr(start, pos_ - start));
  }
  std::string read_int() {
    std::size_t start = pos_;
    if (peek() == '-') advance(1);
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek())))
      advance(1);
    // Normalize the spelling so 007 and 7 are the same constant.
    return std::to_string(
        std::stoll(std::string(text_.substr(start, pos_ - start))));
  }

  std::string text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct Pos {
  int line;
  int col;
};

struct LocatedAtom {
  Atom atom;
  Pos pos;
};

struct RawClause {
  LocatedAtom head;
  std::vector<LocatedAtom> body;
  Pos pos;
};

struct RawMode {
  Mode mode;
  Pos pos;
};

struct RawLevel {
  LevelAnnotation ann;
  Pos pos;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, VarId first_var)
      : toks_(std::move(tokens)) {
    gen_.next = first_var;
  }

  const Token& peek() const { return toks_[pos_]; }
  const Token& get() {
    const Token& t = toks_[pos_];
    if (t.kind != Tok::End) ++pos_;
    return t;
  }
  bool at(Tok k) const { return peek().kind == k; }
  Token expect(Tok k, const std::string& what) {
    if (!at(k)) fail(peek().line, peek().col, "expected " + what);
    return get();
  }

  /// Clause-local variable scope; `_` is always fresh.
  void open_scope() { scope_.clear(); }

  Term intern_var(const Token& t) {
    if (t.text == "_") {
      VarId id = gen_.fresh();
      names_[id] = "_";
      return Term::var(id);
    }
    auto it = scope_.find(t.text);
    if (it == scope_.end()) {
      VarId id = gen_.fresh();
      names_[id] = t.text;
      it = scope_.emplace(t.text, id).first;
    }
    return Term::var(it->second);
  }

  Term parse_term() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Var:
        return intern_var(get());
      case Tok::Int:
        return Term::constant(get().text);
      case Tok::Name: {
        Token name = get();
        if (at(Tok::LParen)) {
          get();
          std::vector<Term> args;
          args.push_back(parse_term());
          while (at(Tok::Comma)) {
            get();
            args.push_back(parse_term());
          }
          expect(Tok::RParen, "')'");
          return Term::fun(name.text, std::move(args));
        }
        return Term::constant(name.text);
      }
      case Tok::LBracket: {
        get();
        if (at(Tok::RBracket)) {
          get();
          return Term::nil();
        }
        std::vector<Term> elems;
        elems.push_back(parse_term());
        while (at(Tok::Comma)) {
          get();
          elems.push_back(parse_term());
        }
        Term tail = Term::nil();
        if (at(Tok::Bar)) {
          get();
          tail = parse_term();
        }
        expect(Tok::RBracket, "']'");
        for (auto it = elems.rbegin(); it != elems.rend(); ++it)
          tail = Term::cons(*it, tail);
        return tail;
      }
      default:
        fail(t.line, t.col, "expected a term, got '" + t.text + "'");
    }
  }

  LocatedAtom parse_atom() {
    Pos pos{peek().line, peek().col};
    Term t1 = parse_term();
    if (at(Tok::Cmp)) {
      Token op = get();
      Term t2 = parse_term();
      return {Atom{op.text, {t1, t2}}, pos};
    }
    if (t1.is_var())
      fail(pos.line, pos.col, "a variable cannot be used as an atom");
    if (t1.as_int() || t1.functor() == "[]" || t1.functor() == ".")
      fail(pos.line, pos.col, "'" + to_string(t1) + "' cannot be used as an atom");
    return {Atom{t1.functor(), t1.args()}, pos};
  }

  RawClause parse_clause() {
    open_scope();
    RawClause c;
    c.pos = {peek().line, peek().col};
    c.head = parse_atom();
    if (at(Tok::ColonDash)) {
      get();
      c.body.push_back(parse_atom());
      while (at(Tok::Comma)) {
        get();
        c.body.push_back(parse_atom());
      }
    }
    expect(Tok::Dot, "'.' at end of clause");
    return c;
  }

  Flow parse_flow() {
    const Token& t = peek();
    if (t.kind == Tok::Name || t.kind == Tok::Var) {
      std::string s = get().text;
      for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      if (s == "in") return Flow::In;
      if (s == "out") return Flow::Out;
    }
    fail(t.line, t.col, "expected 'in' or 'out' in mode declaration");
  }

  std::string parse_pred_name() {
    const Token& t = peek();
    if (t.kind == Tok::Name) return get().text;
    if (t.kind == Tok::Cmp) return get().text;  // modes for builtins
    fail(t.line, t.col, "expected a predicate name");
  }

  RawMode parse_mode_directive(Pos pos) {
    RawMode m;
    m.pos = pos;
    m.mode.pred = parse_pred_name();
    expect(Tok::LParen, "'('");
    m.mode.flows.push_back(parse_flow());
    while (at(Tok::Comma)) {
      get();
      m.mode.flows.push_back(parse_flow());
    }
    expect(Tok::RParen, "')'");
    expect(Tok::Dot, "'.'");
    return m;
  }

  RawLevel parse_level_directive(Pos pos) {
    RawLevel l;
    l.pos = pos;
    l.ann.pred = parse_pred_name();
    expect(Tok::LParen, "'('");
    for (;;) {
      const Token& t = peek();
      if (t.kind == Tok::Int) {
        long long v = std::stoll(get().text);
        if (v < 0) fail(t.line, t.col, "level coefficients must be non-negative");
        l.ann.coeffs.push_back(v);
      } else if (t.kind == Tok::Var && t.text == "_") {
        get();
        l.ann.coeffs.push_back(std::nullopt);
      } else {
        fail(t.line, t.col, "expected a coefficient or '_'");
      }
      if (!at(Tok::Comma)) break;
      get();
    }
    expect(Tok::RParen, "')'");
    if (at(Tok::Plus)) {
      get();
      Token t = expect(Tok::Int, "a constant after '+'");
      long long v = std::stoll(t.text);
      if (v < 0) fail(t.line, t.col, "level constant must be non-negative");
      l.ann.constant = v;
    }
    expect(Tok::Dot, "'.'");
    return l;
  }

  void sync_to_dot() {
    while (!at(Tok::End)) {
      if (get().kind == Tok::Dot) return;
    }
  }

  VarNames names_;
  VarGen gen_;

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, VarId> scope_;
};

struct Collected {
  std::vector<RawClause> clauses;
  std::vector<RawMode> modes;
  std::vector<RawLevel> levels;
};

/// Builds the mode table (duplicates are errors, builtins may be restated
/// verbatim), defaults undeclared predicates to all-input with a warning,
/// and checks every atom's arity against it.
void resolve_modes(const Collected& raw,
                   const std::vector<std::pair<Atom, Pos>>& extra_atoms,
                   const std::map<std::string, Mode>* base,
                   std::map<std::string, Mode>& modes,
                   std::vector<ParseError>& errors,
                   std::vector<std::string>& warnings) {
  for (const RawMode& m : raw.modes) {
    if (const Mode* b = builtin_mode(m.mode.pred)) {
      if (b->flows != m.mode.flows)
        errors.push_back({m.pos.line, m.pos.col,
                          "mode of builtin " + m.mode.pred +
                              " conflicts with its fixed mode " + to_string(*b)});
      continue;
    }
    auto [it, fresh] = modes.emplace(m.mode.pred, m.mode);
    if (!fresh)
      errors.push_back({m.pos.line, m.pos.col,
                        "duplicate mode declaration for " + m.mode.pred + "/" +
                            std::to_string(it->second.arity())});
  }
  auto check_atom = [&](const Atom& a, Pos pos, bool is_head) {
    if (is_builtin_pred(a.pred)) {
      if (is_head) {
        errors.push_back({pos.line, pos.col,
                          "clause head redefines builtin " + a.pred});
        return;
      }
      if (a.arity() != builtin_mode(a.pred)->arity())
        errors.push_back({pos.line, pos.col,
                          a.pred + " used with arity " +
                              std::to_string(a.arity()) + ", builtin expects " +
                              std::to_string(builtin_mode(a.pred)->arity())});
      return;
    }
    auto it = modes.find(a.pred);
    if (it == modes.end() && base) {
      auto bit = base->find(a.pred);
      if (bit != base->end()) it = modes.emplace(a.pred, bit->second).first;
    }
    if (it == modes.end()) {
      Mode def{a.pred, std::vector<Flow>(a.args.size(), Flow::In)};
      modes.emplace(a.pred, def);
      warnings.push_back("no mode declared for " + a.pred + "/" +
                         std::to_string(a.arity()) +
                         "; defaulting to all input positions");
      return;
    }
    if (it->second.arity() != a.arity())
      errors.push_back({pos.line, pos.col,
                        a.pred + " used with arity " +
                            std::to_string(a.arity()) + ", declared with " +
                            std::to_string(it->second.arity())});
  };
  for (const RawClause& c : raw.clauses) {
    check_atom(c.head.atom, c.head.pos, true);
    for (const LocatedAtom& a : c.body) check_atom(a.atom, a.pos, false);
  }
  for (const auto& [a, pos] : extra_atoms) check_atom(a, pos, false);
}

void resolve_levels(const Collected& raw,
                    const std::map<std::string, Mode>& modes,
                    std::map<std::string, LevelAnnotation>& out,
                    std::vector<ParseError>& errors) {
  for (const RawLevel& l : raw.levels) {
    auto mit = modes.find(l.ann.pred);
    const Mode* mode =
        mit != modes.end() ? &mit->second : builtin_mode(l.ann.pred);
    if (!mode) {
      errors.push_back({l.pos.line, l.pos.col,
                        "level annotation for unknown predicate " + l.ann.pred});
      continue;
    }
    if (static_cast<int>(l.ann.coeffs.size()) != mode->arity()) {
      errors.push_back({l.pos.line, l.pos.col,
                        "level annotation arity mismatch for " + l.ann.pred});
      continue;
    }
    bool ok = true;
    for (std::size_t i = 0; i < l.ann.coeffs.size(); ++i) {
      bool is_out = mode->flows[i] == Flow::Out;
      if (is_out != !l.ann.coeffs[i].has_value()) {
        errors.push_back(
            {l.pos.line, l.pos.col,
             "level annotation for " + l.ann.pred + " must use '_' exactly at "
             "output positions"});
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (!out.emplace(l.ann.pred, l.ann).second)
      errors.push_back({l.pos.line, l.pos.col,
                        "duplicate level annotation for " + l.ann.pred});
  }
}

}  // namespace

std::string ParseError::render() const {
  std::ostringstream os;
  os << "line " << line << ", col " << col << ": " << message;
  return os.str();
}

ProgramParse parse_program(std::string_view text) {
  ProgramParse result;
  std::vector<Token> tokens;
  try {
    tokens = Lexer(text).run();
  } catch (const SyntaxError& e) {
    result.errors.push_back(e.err);
    return result;
  }
  Parser parser(std::move(tokens), 0);
  Collected raw;
  while (!parser.at(Tok::End)) {
    try {
      if (parser.at(Tok::ColonDash)) {
        Token t = parser.get();
        Pos pos{t.line, t.col};
        if (parser.peek().kind == Tok::Name && parser.peek().text == "mode") {
          parser.get();
          raw.modes.push_back(parser.parse_mode_directive(pos));
        } else if (parser.peek().kind == Tok::Name &&
                   parser.peek().text == "level") {
          parser.get();
          raw.levels.push_back(parser.parse_level_directive(pos));
        } else {
          fail(pos.line, pos.col, "unknown directive (expected mode or level)");
        }
      } else {
        raw.clauses.push_back(parser.parse_clause());
      }
    } catch (const SyntaxError& e) {
      result.errors.push_back(e.err);
      parser.sync_to_dot();
    }
  }

  std::map<std::string, Mode> modes;
  resolve_modes(raw, {}, nullptr, modes, result.errors, result.warnings);
  std::map<std::string, LevelAnnotation> levels;
  resolve_levels(raw, modes, levels, result.errors);
  if (!result.errors.empty()) return result;

  ModedProgram p;
  for (const RawClause& c : raw.clauses) {
    Clause clause;
    clause.head = c.head.atom;
    for (const LocatedAtom& a : c.body) clause.body.push_back(a.atom);
    p.clauses.push_back(std::move(clause));
  }
  p.modes = std::move(modes);
  p.level_annotations = std::move(levels);
  p.var_names = parser.names_;
  p.next_var = parser.gen_.next;
  result.program = std::move(p);
  return result;
}

QueryParse parse_query(std::string_view text, const ModedProgram& program) {
  QueryParse result;
  std::vector<Token> tokens;
  try {
    tokens = Lexer(text).run();
  } catch (const SyntaxError& e) {
    result.errors.push_back(e.err);
    return result;
  }
  Parser parser(std::move(tokens), program.next_var);
  parser.open_scope();
  std::vector<std::pair<Atom, Pos>> atoms;
  try {
    if (!parser.at(Tok::End)) {
      LocatedAtom a = parser.parse_atom();
      atoms.emplace_back(a.atom, a.pos);
      while (parser.at(Tok::Comma)) {
        parser.get();
        a = parser.parse_atom();
        atoms.emplace_back(a.atom, a.pos);
      }
      if (parser.at(Tok::Dot)) parser.get();
      if (!parser.at(Tok::End))
        fail(parser.peek().line, parser.peek().col,
             "unexpected input after query");
    }
  } catch (const SyntaxError& e) {
    result.errors.push_back(e.err);
    return result;
  }

  Collected raw;
  std::map<std::string, Mode> modes;
  resolve_modes(raw, atoms, &program.modes, modes, result.errors,
                result.warnings);
  if (!result.errors.empty()) return result;

  Query q;
  for (const auto& [a, pos] : atoms) q.push_back(a);
  result.query = std::move(q);
  result.names = parser.names_;
  result.next_var = parser.gen_.next;
  for (const auto& [pred, mode] : modes)
    if (!program.declares(pred)) result.extra_modes.emplace(pred, mode);
  return result;
}

}  // namespace icterm
