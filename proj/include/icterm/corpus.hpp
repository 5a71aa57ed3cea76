#pragma once

#include <optional>
#include <string>
#include <vector>

#include "icterm/ic_engine.hpp"
#include "icterm/parser.hpp"
#include "icterm/program.hpp"

namespace icterm {

/// One query of an entry's panel with its frozen expected outcome. The
/// answer string is the rendered c.a.s. restricted to the query variables;
/// empty means "do not check the bindings".
struct QueryCase {
  std::string query;
  DerivationStatus expected = DerivationStatus::Success;
  std::string expected_answer;
};

/// Tree built as bounded termination evidence. When `expected_nodes` is
/// set the exact count must match; otherwise the tree must merely complete
/// within the default node budget.
struct TreeCase {
  std::string query;
  std::optional<std::size_t> expected_nodes;
};

/// A bundled program with its expected classification flags. `it` is
/// reference metadata: input termination is semi-decidable, so the runner
/// only reports tree/derivation evidence for it instead of asserting it.
struct CorpusEntry {
  std::string name;
  std::string source;
  std::string main_mode;
  bool nm = false;
  bool sm = false;
  bool ir = false;
  std::optional<bool> perm_nm;  // set when the textual order is not the moded one
  std::optional<bool> perm_sm;
  std::optional<bool> qr;  // declared mapping if present, else inferred
  bool it = false;         // reference-only
  std::vector<QueryCase> queries;
  std::vector<TreeCase> trees;
};

/// The bundled entries, fixed order.
const std::vector<CorpusEntry>& corpus();

/// Entry by name; throws std::out_of_range on unknown names.
const CorpusEntry& corpus_entry(const std::string& name);

/// Parses an entry's source; throws std::runtime_error on parse errors.
ModedProgram load_entry(const CorpusEntry& e);

/// Extends a copy of the program with the default modes a query parse
/// introduced for undeclared predicates.
ModedProgram with_query_modes(const ModedProgram& p, const QueryParse& qp);

struct EntryResult {
  std::string name;
  bool ok = true;
  std::vector<std::string> diffs;  // expectation mismatches
  std::vector<std::string> notes;  // informational evidence lines
  double millis = 0;
};

struct CorpusResult {
  std::vector<EntryResult> entries;
  bool all_ok() const;
};

/// Checks every decidable expectation of one entry against the analyzers
/// and runs its query and tree panels.
EntryResult check_entry(const CorpusEntry& e);

/// Runs matching entries (substring filter; empty matches all) in
/// parallel, results in corpus order.
CorpusResult run_corpus(const std::string& filter = "");

}  // namespace icterm
