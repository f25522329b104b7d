#pragma once

#include "ergo/extract.hpp"
#include "ergo/ir.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace ergo {

/// Inferred relation arguments, one ordered list per block (and per loop-call
/// node) of a unit. Ordering: function parameters first (declaration order),
/// then the block's own phi destinations (phi order), then the rest by name.
struct UnitArgs {
  std::map<std::string, std::vector<std::string>> args_in;
  std::vector<std::string> entry_args;  // args_in of the unit's entry block
};

struct FunctionArgs {
  std::map<std::string, UnitArgs> by_unit;  // keyed by unit name
  std::vector<std::string> notes;  // e.g. loop-computed values dropped at continuations
};

/// Minimal block arguments: the variables whose values a block's cost can
/// depend on. A backward fixpoint: a block needs what its branching reads
/// and whatever lets it produce the arguments of its successors; call
/// arguments count, and phis translate names across edges. The entry block
/// of the residual unit is pinned to the declared parameter list.
///
/// Conservativity: every inferred argument is live-in classically; the set is
/// usually smaller because straight-line data flow that never reaches a
/// branch, call, or successor argument is ignored.
FunctionArgs infer_block_args(const Function& f, const ExtractedProgram& prog);

/// Convenience over all functions of a module, keyed by function name.
std::map<std::string, FunctionArgs> infer_module_args(
    const Module& m, const std::map<std::string, ExtractedProgram>& programs);

}  // namespace ergo
