#include "ergo/cfg.hpp"

#include "ergo/error.hpp"

#include <algorithm>
#include <sstream>

namespace ergo {

const char* edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::Uncond: return "uncond";
    case EdgeKind::True: return "true";
    case EdgeKind::False: return "false";
    case EdgeKind::Cont: return "cont";
  }
  return "?";
}

int Cfg::node(const std::string& label) const {
  auto it = index.find(label);
  return it == index.end() ? -1 : it->second;
}

std::vector<int> Cfg::edges_from(int n) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i].from == n) out.push_back(static_cast<int>(i));
  return out;
}

Cfg make_cfg(std::string fn, std::vector<std::string> nodes,
             const std::vector<EdgeSpec>& edges) {
  Cfg g;
  g.fn = std::move(fn);
  g.nodes = std::move(nodes);
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    g.index.emplace(g.nodes[i], static_cast<int>(i));
  g.succ.resize(g.nodes.size());
  g.pred.resize(g.nodes.size());
  for (const auto& e : edges) {
    int from = g.node(e.from);
    int to = g.node(e.to);
    if (from < 0 || to < 0)
      throw Error("cfg edge endpoint is not a node: " + e.from + " -> " + e.to);
    g.edges.push_back({from, to, e.kind, e.exit_from});
    if (std::find(g.succ[from].begin(), g.succ[from].end(), to) == g.succ[from].end())
      g.succ[from].push_back(to);
    if (std::find(g.pred[to].begin(), g.pred[to].end(), from) == g.pred[to].end())
      g.pred[to].push_back(from);
  }
  return g;
}

Cfg build_cfg(const Function& f) {
  std::vector<std::string> nodes;
  std::vector<EdgeSpec> edges;
  for (const auto& bb : f.blocks) {
    nodes.push_back(bb.label);
    const Instruction& term = bb.terminator();
    if (const auto* cbr = term.as<CondBr>()) {
      edges.push_back({bb.label, cbr->then_label, EdgeKind::True, ""});
      edges.push_back({bb.label, cbr->else_label, EdgeKind::False, ""});
    } else if (const auto* br = term.as<Br>()) {
      edges.push_back({bb.label, br->target, EdgeKind::Uncond, ""});
    }
  }
  Cfg g = make_cfg(f.name, std::move(nodes), edges);

  std::vector<bool> seen(g.nodes.size(), false);
  std::vector<int> work{0};
  seen[0] = true;
  while (!work.empty()) {
    int n = work.back();
    work.pop_back();
    for (int s : g.succ[n])
      if (!seen[s]) {
        seen[s] = true;
        work.push_back(s);
      }
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw Error("block " + g.nodes[i] + " in @" + f.name + " is unreachable from entry");
  return g;
}

namespace {

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string cfg_dot(const Cfg& g, const std::string& title, const std::vector<EdgeSpec>& ghosts) {
  std::ostringstream os;
  os << "digraph " << dot_quote(title) << " {\n";
  os << "  label=" << dot_quote(title) << ";\n  node [shape=ellipse];\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    os << "  " << dot_quote(g.nodes[i]);
    if (i == 0) os << " [penwidth=2]";
    os << ";\n";
  }
  for (const auto& e : g.edges) {
    os << "  " << dot_quote(g.nodes[e.from]) << " -> " << dot_quote(g.nodes[e.to]);
    switch (e.kind) {
      case EdgeKind::True: os << " [label=\"T\"]"; break;
      case EdgeKind::False: os << " [label=\"F\"]"; break;
      case EdgeKind::Cont:
        os << " [style=dashed, label=" << dot_quote("via " + e.exit_from) << "]";
        break;
      case EdgeKind::Uncond: break;
    }
    os << ";\n";
  }
  for (const auto& e : ghosts) {
    os << "  " << dot_quote(e.to) << " [shape=box, style=dashed];\n";
    os << "  " << dot_quote(e.from) << " -> " << dot_quote(e.to) << " [style=dotted];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace ergo
