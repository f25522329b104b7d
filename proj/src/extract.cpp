#include "ergo/extract.hpp"

#include "ergo/error.hpp"

#include <algorithm>

namespace ergo {

const ExtractedUnit* ExtractedProgram::unit(const std::string& name) const {
  for (const auto& u : units)
    if (u.name == name) return &u;
  return nullptr;
}

namespace {

/// Mutable label-level graph the extraction rounds rewrite.
struct View {
  std::vector<std::string> nodes;
  std::vector<EdgeSpec> edges;
  std::map<std::string, CallSite> calls;
};

std::map<std::string, std::string> def_blocks(const Function& f) {
  std::map<std::string, std::string> out;
  for (const auto& bb : f.blocks)
    for (const auto& inst : bb.insts)
      if (auto v = defined_var(inst)) out.emplace(*v, bb.label);
  return out;
}

/// A value carried by an enclosing loop's header phi must not be computed in
/// the loop being extracted: after extraction the enclosing recursion could
/// no longer see its own induction update.
void check_outer_induction(const Function& f, const Cfg& cur, const LoopForest& forest,
                           int loop_idx, const std::set<std::string>& body_labels,
                           const std::map<std::string, std::string>& defs) {
  for (int anc = forest.loops[loop_idx].parent; anc >= 0; anc = forest.loops[anc].parent) {
    const std::string& header = cur.nodes[forest.loops[anc].header];
    const BasicBlock* hb = f.block(header);
    if (!hb) continue;  // call nodes never head loops
    for (const auto& inst : hb->insts) {
      const auto* phi = inst.as<Phi>();
      if (!phi) break;  // phis lead the block
      for (const auto& in : phi->incomings) {
        if (!in.value.is_var()) continue;
        auto def = defs.find(in.value.var);
        if (def != defs.end() && body_labels.count(def->second))
          throw AnalysisError(ErrorKind::OuterInductionMutated,
                              "@" + f.name + ": %" + phi->dest + " of loop header " + header +
                                  " is updated via %" + in.value.var + " defined in " +
                                  def->second + ", inside the loop being extracted");
      }
    }
  }
}

ExtractedUnit finish_unit(std::string name, const Function& f, bool is_loop, View view,
                          const ExtractedProgram& prog) {
  ExtractedUnit u;
  u.name = std::move(name);
  u.fn = f.name;
  u.is_loop = is_loop;
  u.calls = std::move(view.calls);
  std::vector<EdgeSpec> inner;
  std::set<std::string> here(view.nodes.begin(), view.nodes.end());
  for (auto& e : view.edges) {
    if (!here.count(e.from)) continue;
    if (here.count(e.to))
      inner.push_back(e);
    else
      u.exits.push_back(e);
  }
  u.cfg = make_cfg(f.name, view.nodes, inner);
  for (const auto& label : view.nodes) {
    if (const auto* call = u.calls.count(label) ? &u.calls.at(label) : nullptr) {
      if (const auto* callee = prog.unit(call->callee))
        u.defs.insert(callee->defs.begin(), callee->defs.end());
      continue;
    }
    for (const auto& inst : f.block(label)->insts)
      if (auto v = defined_var(inst)) u.defs.insert(*v);
  }
  for (const auto& e : u.exits)
    if (u.calls.count(e.from))
      u.notes.push_back("exit of " + u.calls.at(e.from).callee + " leaves this loop as well (" +
                        e.from + " -> " + e.to + ")");
  return u;
}

}  // namespace

ExtractedProgram extract_nested_loops(const Function& f, const Cfg& g,
                                      const LoopForest& forest) {
  ExtractedProgram prog;
  prog.fn = f.name;
  auto defs = def_blocks(f);

  View view;
  view.nodes = g.nodes;
  for (const auto& e : g.edges)
    view.edges.push_back({g.nodes[e.from], g.nodes[e.to], e.kind, e.exit_from});

  LoopForest cur_forest = forest;
  Cfg cur = g;
  while (cur_forest.loops.size() > 1) {
    // innermost loop with the smallest header index, for determinism
    int pick = -1;
    for (std::size_t i = 0; i < cur_forest.loops.size(); ++i) {
      if (!cur_forest.loops[i].children.empty()) continue;
      if (pick < 0 || cur_forest.loops[i].header < cur_forest.loops[pick].header)
        pick = static_cast<int>(i);
    }
    const Loop& loop = cur_forest.loops[pick];
    const std::string header = cur.nodes[loop.header];

    std::set<std::string> body_labels;
    for (int n : loop.body) body_labels.insert(cur.nodes[n]);
    std::set<std::string> real_body = body_labels;
    for (const auto& [label, call] : view.calls) real_body.erase(label);
    check_outer_induction(f, cur, cur_forest, pick, real_body, defs);

    // carve the loop's nodes, edges, and call sites into their own unit
    View carved;
    carved.nodes.push_back(header);
    for (const auto& label : view.nodes)
      if (label != header && body_labels.count(label)) carved.nodes.push_back(label);
    for (const auto& e : view.edges)
      if (body_labels.count(e.from)) carved.edges.push_back(e);
    for (const auto& label : body_labels)
      if (auto it = view.calls.find(label); it != view.calls.end()) {
        carved.calls.emplace(label, it->second);
        view.calls.erase(it);
      }
    ExtractedUnit unit =
        finish_unit(f.name + ".loop." + header, f, /*is_loop=*/true, std::move(carved), prog);

    // the call node takes the header's place; continuations follow old exits
    CallSite site;
    site.label = header;
    site.callee = unit.name;
    std::vector<EdgeSpec> next_edges;
    for (const auto& e : view.edges) {
      if (body_labels.count(e.from)) continue;  // interior or exit edge, now in the unit
      next_edges.push_back(e);                  // edges into the header keep their target
    }
    for (const auto& e : unit.exits) {
      next_edges.push_back({header, e.to, EdgeKind::Cont, e.from});
      site.continuations.push_back({e.from, e.to});
    }
    std::vector<std::string> next_nodes;
    for (const auto& label : view.nodes)
      if (label == header || !body_labels.count(label)) next_nodes.push_back(label);
    view.nodes = std::move(next_nodes);
    view.edges = std::move(next_edges);
    view.calls.emplace(header, std::move(site));
    prog.units.push_back(std::move(unit));

    cur = make_cfg(f.name, view.nodes, view.edges);
    cur_forest = find_loops(cur);
  }

  // the residual keeps the function's entry and params, even when one loop
  // remains inline
  prog.units.push_back(finish_unit(f.name, f, /*is_loop=*/false, std::move(view), prog));
  return prog;
}

std::map<std::string, ExtractedProgram> extract_module(const Module& m) {
  std::map<std::string, ExtractedProgram> out;
  for (const auto& f : m.functions) {
    Cfg g = build_cfg(f);
    out.emplace(f.name, extract_nested_loops(f, g, find_loops(g)));
  }
  return out;
}

}  // namespace ergo
