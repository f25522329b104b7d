#pragma once

#include "ergo/closed_form.hpp"
#include "ergo/costrel.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ergo {

struct SolveOutcome {
  /// Closed form per solved relation (pure: the program-level constant is
  /// not folded in, so forms compose across calls without double counting).
  std::map<std::string, ClosedForm> forms;
  /// Relations without a closed form, with the reason.
  std::map<std::string, std::string> unsolved;
  /// Per-function entry formula: the entry relation's form with remaining
  /// max(0, .) collapsed under the function's assumptions (restricting the
  /// domain where needed) and the program-level constant added.
  std::map<std::string, ClosedForm> entry_forms;
  std::vector<std::string> warnings;

  const ClosedForm* form(const std::string& rel) const {
    auto it = forms.find(rel);
    return it == forms.end() ? nullptr : &it->second;
  }
};

/// Solves the system bottom-up: strongly connected groups of relations in
/// callee-first order; recursive groups are collapsed into single-loop
/// patterns (counted ranking updates, contractions) and summed exactly.
SolveOutcome solve(const CostRelationSystem& sys);

enum class EvalMode {
  Worst,          // max over applicable equations; unknown guards applicable
  Deterministic,  // exactly one applicable equation required
};

struct NumericOptions {
  EvalMode mode = EvalMode::Worst;
  /// Equation applications before giving up with NonTerminating.
  long budget = 1'000'000;
};

/// Unrolls a relation numerically (no closed forms involved). Arguments the
/// caller cannot express propagate as unknowns; a guard reading an unknown
/// is taken as satisfiable in Worst mode and raises Nondeterministic in
/// Deterministic mode. Does not add the program-level constant.
Rat evaluate_numeric(const CostRelationSystem& sys, const std::string& rel,
                     const std::vector<Rat>& args, const NumericOptions& opts = {});

}  // namespace ergo
