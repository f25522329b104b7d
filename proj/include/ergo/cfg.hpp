#pragma once

#include "ergo/ir.hpp"

#include <map>
#include <string>
#include <vector>

namespace ergo {

/// True/False tag the two sides of a conditional branch; Cont marks a
/// continuation edge out of a loop-call node (taken when the callee leaves
/// through the recorded exit block).
enum class EdgeKind { Uncond, True, False, Cont };

const char* edge_kind_name(EdgeKind k);

/// Edge description used to assemble graphs; `exit_from` is the callee block
/// whose exit selects a Cont edge, empty otherwise.
struct EdgeSpec {
  std::string from;
  std::string to;
  EdgeKind kind = EdgeKind::Uncond;
  std::string exit_from;
};

/// Directed control-flow graph over block labels. nodes[0] is the entry.
struct Cfg {
  struct Edge {
    int from = 0;
    int to = 0;
    EdgeKind kind = EdgeKind::Uncond;
    std::string exit_from;  // for Cont edges: callee exit block selecting this edge
  };

  std::string fn;                  // owning function
  std::vector<std::string> nodes;  // index -> label, entry first
  std::map<std::string, int> index;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> succ, pred;  // deduplicated adjacency

  const std::string& entry() const { return nodes.front(); }
  /// Node index of `label`, -1 if absent.
  int node(const std::string& label) const;
  /// Indices into `edges` leaving node n, in edge-list order.
  std::vector<int> edges_from(int n) const;
};

/// Assembles adjacency from an edge list. Every edge endpoint must be a
/// listed node.
Cfg make_cfg(std::string fn, std::vector<std::string> nodes, const std::vector<EdgeSpec>& edges);

/// CFG of a validated function: CondBr yields two out-edges (True then
/// False), Br one, Ret none. Errors if any block is unreachable from entry.
Cfg build_cfg(const Function& f);

/// Graphviz text. `ghosts` draws edges that leave the graph (loop-unit exits)
/// as dashed arrows to boxed targets.
std::string cfg_dot(const Cfg& g, const std::string& title,
                    const std::vector<EdgeSpec>& ghosts = {});

}  // namespace ergo
