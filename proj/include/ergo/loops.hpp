#pragma once

#include "ergo/cfg.hpp"

#include <set>
#include <vector>

namespace ergo {

/// Natural loop keyed by its header; loops sharing a header are merged.
struct Loop {
  int header = 0;
  std::set<int> body;                          // includes header
  std::vector<int> latches;                    // back-edge sources, ascending
  std::vector<std::pair<int, int>> exits;      // (from in body, to outside)
  std::vector<std::pair<int, int>> reentries;  // edges into non-header body nodes
                                               // (always empty once reducibility holds)
  int parent = -1;                             // index into LoopForest::loops
  std::vector<int> children;
};

struct LoopForest {
  std::vector<Loop> loops;  // ordered by header node index
  std::vector<int> roots;

  /// Index of the loop headed at node n, -1 if n heads no loop.
  int loop_of_header(int n) const;
  /// Innermost loop whose body contains n, -1 if none.
  int innermost_containing(int n) const;
};

/// Immediate dominators (entry maps to itself). idom[n] = -1 never occurs
/// for graphs built by build_cfg since every node is reachable.
std::vector<int> immediate_dominators(const Cfg& g);

bool dominates(const std::vector<int>& idom, int a, int b);

/// Dominator-based natural-loop detection. Throws
/// AnalysisError(IrreducibleLoop) when some cycle has no dominating header
/// (a retreating DFS edge whose target does not dominate its source).
LoopForest find_loops(const Cfg& g);

}  // namespace ergo
