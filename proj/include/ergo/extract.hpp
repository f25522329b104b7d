#pragma once

#include "ergo/cfg.hpp"
#include "ergo/loops.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace ergo {

/// When the callee leaves through `exit_from`, the caller resumes at `resume`.
struct Continuation {
  std::string exit_from;
  std::string resume;
};

/// A node standing where an extracted loop used to be. Its label equals the
/// callee's entry (the old loop header), so edges into the loop need no
/// rewriting.
struct CallSite {
  std::string label;
  std::string callee;  // extracted unit name
  std::vector<Continuation> continuations;
};

/// One control-flow unit after loop extraction: either an extracted loop
/// (entry is the loop header) or the residual body of a function. Block
/// content stays in the original Function; the unit only partitions labels.
struct ExtractedUnit {
  std::string name;  // "<fn>" for the residual, "<fn>.loop.<header>" otherwise
  std::string fn;
  bool is_loop = false;
  Cfg cfg;                      // exit edges removed
  std::vector<EdgeSpec> exits;  // the removed exit edges, in source order
  std::map<std::string, CallSite> calls;  // keyed by call-node label
  std::set<std::string> defs;  // vars assigned in this unit or any callee
  std::vector<std::string> notes;  // diagnostics, e.g. multi-level loop exits

  bool is_call_node(const std::string& label) const { return calls.count(label) != 0; }
};

/// Units of one function; callees precede callers, the residual unit is last.
struct ExtractedProgram {
  std::string fn;
  std::vector<ExtractedUnit> units;

  const ExtractedUnit* unit(const std::string& name) const;
  const ExtractedUnit& residual() const { return units.back(); }
};

/// Repeatedly extracts an innermost loop until at most one loop remains per
/// unit, so a function whose CFG has no nested loops comes back as a single
/// unit with an empty call map. Refuses with OuterInductionMutated when a
/// value carried by an enclosing loop's header phi is computed inside the
/// loop being extracted.
ExtractedProgram extract_nested_loops(const Function& f, const Cfg& g,
                                      const LoopForest& forest);

/// extract_nested_loops over every function, keyed by function name.
std::map<std::string, ExtractedProgram> extract_module(const Module& m);

}  // namespace ergo
