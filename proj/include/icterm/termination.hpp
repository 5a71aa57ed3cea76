#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icterm/mode_analysis.hpp"
#include "icterm/program.hpp"

namespace icterm {

/// Linear form c + sum k_v * size(v) over term sizes of variables; the
/// symbolic TSize of a term instance. Coefficients may go negative in
/// differences.
struct SymbolicSize {
  long long constant = 0;
  std::map<VarId, long long> coeffs;  // zero coefficients are dropped

  SymbolicSize operator+(const SymbolicSize& o) const;
  SymbolicSize operator-(const SymbolicSize& o) const;
  SymbolicSize scaled(long long k) const;
  long long eval(const std::map<VarId, long long>& sizes) const;
  bool operator==(const SymbolicSize&) const = default;
};

SymbolicSize symbolic_tsize(const Term& t);
std::string to_string(const SymbolicSize& s, const VarNames* names = nullptr);

/// Moded level mapping |p(t1..tn)| = c + sum over input positions of
/// k_i * TSize(t_i); output positions carry coefficient 0 by construction.
struct LevelMapping {
  struct Entry {
    std::vector<long long> coeffs;  // per position; output slots are 0
    long long constant = 0;
    bool operator==(const Entry&) const = default;
  };
  std::map<std::string, Entry> entries;
  bool operator==(const LevelMapping&) const = default;

  /// Missing predicates default to the zero mapping.
  SymbolicSize level_of(const Atom& a, const ModedProgram& p) const;
};

LevelMapping from_annotations(const ModedProgram& p);

/// One head/recursive-body-atom pair of the quasi-recurrency check.
struct QrPair {
  int clause_index;
  int body_index;
  bool proven;
  SymbolicSize difference;  // |H| - |B|
  std::string obstruction;  // empty when proven
};

struct QrReport {
  std::vector<QrPair> pairs;
  bool all_proven() const;
};

/// Sufficient criterion for |H| > |B| on every instance: the symbolic
/// difference has all variable coefficients >= 0 and constant >= 1.
/// Verdicts are Proven / Unknown, never a refutation of termination.
QrReport check_quasi_recurrent(const ModedProgram& p, const LevelMapping& l,
                               const DepGraph& g);

struct SearchSpaceTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Searches coefficients over {0,1} (constant 0) per strongly connected
/// component, in dependency order, for a mapping making every recursive
/// pair Proven. First hit in binary counting order; nullopt when a
/// component has none; throws when a component exceeds 2^20 candidates.
std::optional<LevelMapping> infer_level_mapping(const ModedProgram& p,
                                                const DepGraph& g);

struct TheoremReport {
  bool proven = false;
  std::vector<std::string> failed_hypotheses;
  /// Certificate when proven:
  LevelMapping mapping;
  QrReport qr;
  bool used_permutation = false;
  std::map<int, std::vector<int>> permutations;  // clause -> body order
  std::string note;
};

/// The modular input-termination argument for P extending R: P and R share
/// no definitions, R is input terminating (the builtin base is, axiomatically;
/// otherwise the caller asserts it), P is nicely moded (possibly after a
/// body permutation), and P is quasi-recurrent via `l`. Hypotheses that do
/// not hold are reported by name.
TheoremReport prove_input_termination(const ModedProgram& p,
                                      const ModedProgram& r,
                                      bool r_input_terminating,
                                      const LevelMapping& l);

/// R defaults to the builtin base: no clauses, axiomatically terminating.
TheoremReport prove_input_termination(const ModedProgram& p,
                                      const LevelMapping& l);

struct ProbeSample {
  int clause_index;
  int body_index;
  Atom head_instance;
  Atom body_instance;
  std::optional<std::size_t> head_level;  // IC-tree sizes; nullopt: budget cut
  std::optional<std::size_t> body_level;
  bool decrease = false;
};

struct ProbeReport {
  bool refused = false;
  std::vector<std::string> refused_hypotheses;  // "simply-moded" / "input-recursive"
  std::vector<ProbeSample> samples;
  int violations = 0;
  int undefined = 0;
};

/// Tests the converse direction: for simply moded, input-recursive programs
/// the tree-size level mapping must strictly decrease from head to each
/// recursive body atom on every instance. Grounds head input variables with
/// random lists/integers of bounded depth. Refuses (naming the hypothesis)
/// unless P is simply moded and input recursive.
ProbeReport necessity_probe(const ModedProgram& p, const DepGraph& g,
                            int samples_per_pair, int max_depth,
                            std::size_t node_budget, std::uint64_t seed);

}  // namespace icterm
