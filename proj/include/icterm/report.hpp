#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace icterm {

/// One head/recursive-body-atom line of the quasi-recurrency check,
/// rendered for reporting.
struct QrLine {
  int clause_index = -1;
  int body_index = -1;
  bool proven = false;
  std::string difference;
  std::string obstruction;
  bool operator==(const QrLine&) const = default;
};

/// Everything `analyze` computed for one file. Deterministic for a fixed
/// input and budgets except for `elapsed_ms`.
struct AnalysisReport {
  std::string file;
  bool parse_ok = false;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool nicely_moded = false;
  bool simply_moded = false;
  bool input_recursive = false;
  std::string nm_witness;  // empty when the check holds
  std::string sm_witness;
  std::string ir_witness;

  std::vector<std::vector<std::string>> sccs;
  std::map<std::string, int> dep;

  std::optional<bool> permutation_nicely_moded;  // --permute only
  std::optional<bool> permutation_simply_moded;
  std::map<int, std::vector<int>> permutations;  // clause -> body order

  std::string mapping_source;  // "declared" | "inferred" | "none"
  std::vector<std::string> mapping;  // rendered per-predicate entries
  std::optional<bool> quasi_recurrent;
  std::vector<QrLine> qr_pairs;

  std::optional<bool> termination_proven;  // prove mode
  std::vector<std::string> failed_hypotheses;

  double elapsed_ms = 0;

  bool operator==(const AnalysisReport&) const = default;
};

/// Single JSON document, schema documented in the README. Round trip:
/// report_from_json(report_to_json(r)) == r.
std::string report_to_json(const AnalysisReport& r);
AnalysisReport report_from_json(const std::string& text);

}  // namespace icterm
