#pragma once

#include "ergo/block_args.hpp"
#include "ergo/costrel.hpp"
#include "ergo/energy.hpp"
#include "ergo/extract.hpp"
#include "ergo/ir.hpp"
#include "ergo/solver.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ergo {

/// Per-function slice of an analysis: the entry formula when the solver
/// produced one, otherwise the reasons it could not.
struct FunctionReport {
  std::string name;
  std::vector<std::string> params;
  std::string entry_relation;
  std::optional<ClosedForm> formula;  // program-level constant folded in
  /// Unsolved relations reachable from this function's entry, with reasons.
  std::map<std::string, std::string> unsolved;
};

/// Result of the whole pipeline on one module under one energy model.
/// Serializations carry no timestamps or paths, so identical inputs yield
/// byte-identical reports whether produced in-process or through the CLI.
struct AnalysisReport {
  int schema_version = 1;
  std::string model;  // model kind name
  std::vector<FunctionReport> functions;
  CostRelationSystem crs;
  SolveOutcome outcome;
  std::map<std::string, FunctionArgs> args;  // inferred block arguments
  /// Merged diagnostics: generator warnings (dropped non-affine guards),
  /// solver warnings, unsolved relations, and blocks whose cost hinges on
  /// select (priced as straight code even though one operand is dead).
  std::vector<std::string> warnings;

  bool fully_solved() const { return outcome.unsolved.empty(); }
  const FunctionReport* function(const std::string& name) const;
};

/// Full pipeline: validate, build CFGs, extract loops, infer block
/// arguments, generate cost relations, and solve them. Throws on structural
/// errors (validation, irreducible loops); unsolvable relations are reported,
/// not thrown.
AnalysisReport analyze_module(const Module& m, const EnergyModel& model,
                              const CrOptions& opts = {});

std::string report_text(const AnalysisReport& r);
nlohmann::json report_json(const AnalysisReport& r);

/// The inferred block arguments alone, for `analyze --dump-args`.
nlohmann::json args_json(const std::map<std::string, FunctionArgs>& args);

}  // namespace ergo
