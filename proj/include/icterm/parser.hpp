#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icterm/program.hpp"

namespace icterm {

struct ParseError {
  int line = 0;
  int col = 0;
  std::string message;
  std::string render() const;
};

struct ProgramParse {
  std::optional<ModedProgram> program;  // present iff errors is empty
  std::vector<ParseError> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

/// Edinburgh-style source: `%` line comments, `head :- body.` clauses,
/// `[H|T]` lists, integers, `:- mode p(in,out).` and
/// `:- level p(1,_) + 0.` directives. Infix comparison atoms are accepted
/// (`X < Y`, `X =< Y`, `X <= Y`, `X \= Y`). Undeclared non-builtin
/// predicates default to all-input modes with a warning.
ProgramParse parse_program(std::string_view text);

struct QueryParse {
  std::optional<Query> query;
  VarNames names;     // display names for the query's variables
  VarId next_var = 0; // first id above the program's and the query's
  std::map<std::string, Mode> extra_modes;  // defaults for undeclared preds
  std::vector<ParseError> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

/// Comma-separated atoms with an optional trailing period; "" is the empty
/// query. Variable ids are allocated above `program.next_var`. Predicates
/// must match the program's modes in arity; undeclared ones default to
/// all-input with a warning.
QueryParse parse_query(std::string_view text, const ModedProgram& program);

}  // namespace icterm
