#include "ergo/block_args.hpp"

#include "ergo/error.hpp"
#include "ergo/seval.hpp"

#include <algorithm>

namespace ergo {

namespace {

/// Variables a conditional branch or any call argument of `bb` depends on,
/// expressed at block entry.
std::set<std::string> gen_of(const BasicBlock& bb) {
  std::set<std::string> out;
  if (const auto* cbr = bb.terminator().as<CondBr>()) {
    auto vars = ergo::ref(seval(bb, cbr->pred, ModApprox::Exact));
    out.insert(vars.begin(), vars.end());
  }
  for (const auto& inst : bb.insts) {
    const auto* call = inst.as<Call>();
    if (!call) continue;
    for (const auto& a : call->args) {
      auto vars = ergo::ref(seval(bb, a, ModApprox::Exact));
      out.insert(vars.begin(), vars.end());
    }
  }
  return out;
}

/// Renames successor arguments across an edge: phi destinations of `succ`
/// become the incoming value for predecessor `pred_label`; other names pass
/// through unchanged.
std::set<std::string> phimap(const BasicBlock& succ, const std::string& pred_label,
                             const std::set<std::string>& succ_args) {
  std::set<std::string> out;
  for (const auto& v : succ_args) {
    const Phi* phi = succ.phi_for(v);
    if (!phi) {
      out.insert(v);
      continue;
    }
    for (const auto& in : phi->incomings)
      if (in.pred == pred_label) {
        if (in.value.is_var()) out.insert(in.value.var);
        break;
      }
  }
  return out;
}

struct UnitSolver {
  const Function& f;
  const ExtractedProgram& prog;
  const ExtractedUnit& unit;
  const std::map<std::string, UnitArgs>& solved;  // callee units, already done
  std::vector<std::string>& notes;

  std::map<std::string, std::set<std::string>> args;  // label -> args_in set

  std::set<std::string> args_out_of(int node) {
    const std::string& label = unit.cfg.nodes[node];
    std::set<std::string> out;
    for (int ei : unit.cfg.edges_from(node)) {
      const Cfg::Edge& e = unit.cfg.edges[ei];
      const std::string& succ_label = unit.cfg.nodes[e.to];
      const std::string pred_label =
          e.kind == EdgeKind::Cont ? e.exit_from : label;
      const BasicBlock* succ = f.block(succ_label);
      // a successor that is itself a call node has no phis of its own; its
      // label names the callee's header block, whose phis do the renaming
      auto mapped = phimap(*succ, pred_label, args[succ_label]);
      out.insert(mapped.begin(), mapped.end());
    }
    return out;
  }

  /// One transfer evaluation for the block or call node at `node`.
  std::set<std::string> transfer(int node) {
    const std::string& label = unit.cfg.nodes[node];
    std::set<std::string> out_args = args_out_of(node);
    std::set<std::string> in;
    if (const auto* site = unit.calls.count(label) ? &unit.calls.at(label) : nullptr) {
      const UnitArgs& callee = solved.at(site->callee);
      in.insert(callee.entry_args.begin(), callee.entry_args.end());
      const std::set<std::string>& produced = prog.unit(site->callee)->defs;
      for (const auto& v : out_args) {
        if (!produced.count(v)) {
          in.insert(v);
        } else {
          std::string note = "@" + f.name + ": continuation after " + site->callee +
                             " needs %" + v + ", which the loop computes; dropped";
          if (std::find(notes.begin(), notes.end(), note) == notes.end())
            notes.push_back(note);
        }
      }
      return in;
    }
    const BasicBlock& bb = *f.block(label);
    in = gen_of(bb);
    for (const auto& v : out_args) {
      auto deps = ergo::ref(seval(bb, v, ModApprox::Exact));
      in.insert(deps.begin(), deps.end());
    }
    return in;
  }

  void run() {
    for (const auto& label : unit.cfg.nodes) args[label] = {};
    bool changed = true;
    while (changed) {
      changed = false;
      // backward flow: sweep away from the entry so successors settle first
      for (int n = static_cast<int>(unit.cfg.nodes.size()) - 1; n >= 0; --n) {
        std::set<std::string> next = transfer(n);
        // the residual entry is pinned to the declared parameters
        if (n == 0 && !unit.is_loop) {
          next = std::set<std::string>(f.params.begin(), f.params.end());
        }
        std::set<std::string>& cur = args[unit.cfg.nodes[n]];
        if (next != cur) {
          cur = std::move(next);
          changed = true;
        }
      }
    }
  }
};

std::vector<std::string> ordered(const Function& f, const BasicBlock* bb,
                                 const std::set<std::string>& in) {
  std::vector<std::string> out;
  std::set<std::string> left = in;
  for (const auto& p : f.params)
    if (left.erase(p)) out.push_back(p);
  if (bb)
    for (const auto& inst : bb->insts) {
      const auto* phi = inst.as<Phi>();
      if (!phi) break;
      if (left.erase(phi->dest)) out.push_back(phi->dest);
    }
  out.insert(out.end(), left.begin(), left.end());
  return out;
}

}  // namespace

FunctionArgs infer_block_args(const Function& f, const ExtractedProgram& prog) {
  FunctionArgs result;
  for (const auto& unit : prog.units) {
    UnitSolver solver{f, prog, unit, result.by_unit, result.notes, {}};
    solver.run();
    UnitArgs ua;
    for (const auto& [label, set] : solver.args) {
      // the block content (for phi ordering) lives in the original function;
      // a call node orders by its callee's header phis, same label either way
      ua.args_in.emplace(label, ordered(f, f.block(label), set));
    }
    ua.entry_args = ua.args_in.at(unit.cfg.entry());
    result.by_unit.emplace(unit.name, std::move(ua));
  }
  return result;
}

std::map<std::string, FunctionArgs> infer_module_args(
    const Module& m, const std::map<std::string, ExtractedProgram>& programs) {
  std::map<std::string, FunctionArgs> out;
  for (const auto& f : m.functions) out.emplace(f.name, infer_block_args(f, programs.at(f.name)));
  return out;
}

}  // namespace ergo
