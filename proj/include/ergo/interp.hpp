#pragma once

#include "ergo/energy.hpp"
#include "ergo/extract.hpp"
#include "ergo/ir.hpp"
#include "ergo/numeric.hpp"

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace ergo {

/// Address of one memory access: base + scale * env[var] (just base when no
/// variable is named).
struct AddrExpr {
  Int base = 0;
  std::optional<std::string> var;
  Int scale = 1;
};

/// Behavior of one memload site. Exactly one source applies, checked in this
/// order: a literal value stream, a computed address, an address stream.
/// Streams cycle when exhausted; an unspecified site reads 0.
struct LoadSpec {
  std::vector<Int> values;
  std::optional<AddrExpr> addr;
  std::vector<Int> addrs;
};

/// Behavior of one memstore site: where to write (computed address or cycling
/// address stream) and what (a variable's current value or a literal). An
/// unspecified site is a no-op that still costs energy.
struct StoreSpec {
  std::optional<AddrExpr> addr;
  std::vector<Int> addrs;
  std::optional<std::string> value_var;
  Int value_lit = 0;
};

/// (function, block, instruction index) of a memory access.
using SiteKey = std::tuple<std::string, std::string, int>;

/// Everything the calculus abstracts away but a concrete run needs: initial
/// memory cells, per-site load/store behavior, and values returned by
/// external callees (cycling streams; an absent entry returns 0).
struct RunFixture {
  std::map<Int, Int> cells;
  std::map<SiteKey, LoadSpec> loads;
  std::map<SiteKey, StoreSpec> stores;
  std::map<std::string, std::vector<Int>> extern_returns;
};

/// JSON shape:
///   {"cells": [4,3,2,1] | {"0": 4, "1": 3},
///    "loads":  [{"fn","block","index", "values":[...] | "addr":{"base","var","scale"}
///                | "addrs":[...]}],
///    "stores": [{"fn","block","index", "addr":{...} | "addrs":[...],
///                "value": "x" | 7}],
///    "extern_returns": {"name": [1,2,3]}}
/// A "cells" array populates addresses 0..n-1.
RunFixture load_fixture_json(const std::string& text);
RunFixture load_fixture_file(const std::string& path);

struct RunResult {
  std::vector<std::pair<std::string, std::string>> trace;  // (function, block)
  Rat energy = 0;                 // per-block pricing, nanojoules
  Rat energy_by_instruction = 0;  // independent per-instruction tally
  std::optional<Int> ret;
  long steps = 0;
  std::map<Int, Int> memory;  // final cells
  InstructionCounts counts;
};

inline constexpr long kDefaultStepBudget = 10'000'000;

/// Executes @fn on the given arguments. Instructions run one small step at a
/// time against a mutable environment (loop iterations rebind the variables
/// their blocks define; phi assignments within a block are parallel). Both
/// energy tallies include the model's program-level constant once.
/// Errors: arity mismatch, read of an undefined variable, division by zero,
/// shift/bitwise domain violations, step budget exhaustion (NonTerminating).
RunResult run(const Module& m, const std::string& fn, const std::vector<Int>& args,
              const RunFixture& fixture, const EnergyModel& model,
              long step_budget = kDefaultStepBudget);

/// Same execution replayed over extracted units: a call node runs its loop
/// unit until the callee leaves through an exit edge, then control resumes at
/// that edge's target in the caller. Produces the same trace, energy, and
/// result as run() on the original module.
RunResult run_extracted(const Module& m,
                        const std::map<std::string, ExtractedProgram>& programs,
                        const std::string& fn, const std::vector<Int>& args,
                        const RunFixture& fixture, const EnergyModel& model,
                        long step_budget = kDefaultStepBudget);

}  // namespace ergo
