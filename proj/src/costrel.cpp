#include "ergo/costrel.hpp"

#include "ergo/error.hpp"

#include <algorithm>
#include <sstream>

namespace ergo {

std::string CrArg::text() const {
  if (is_affine()) return num.text();
  std::string s = "floor((" + num.text() + ")/" + div.str() + ")";
  if (amort != 1) s += "~" + amort.str();  // reached every amort-th step
  return s;
}

const CrRelation* CostRelationSystem::relation(const std::string& name) const {
  auto it = index.find(name);
  return it == index.end() ? nullptr : &relations[it->second];
}

namespace {

/// Relation names: C_<label>, with the owning function prepended only when
/// the label is not unique across the module; a trailing ' marks the
/// call-node relation standing where an extracted loop used to be.
struct Namer {
  std::map<std::string, std::set<std::string>> owners;

  explicit Namer(const Module& m) {
    for (const auto& f : m.functions)
      for (const auto& bb : f.blocks) owners[bb.label].insert(f.name);
  }

  std::string operator()(const std::string& fn, const std::string& label, bool call_node) const {
    std::string n = "C_";
    auto it = owners.find(label);
    if (it != owners.end() && it->second.size() > 1) n += fn + ".";
    n += label;
    if (call_node) n += "'";
    return n;
  }
};

/// floor(affine / const) or plain affine; nullopt for anything else.
std::optional<CrArg> to_cr_arg(const SymExprPtr& e) {
  if (auto l = as_linear(e)) return CrArg{*l, 1};
  if (e->kind == SymExpr::Kind::Bin && e->op == SymOp::Div &&
      e->rhs->kind == SymExpr::Kind::IntConst && e->rhs->value > 0) {
    if (auto l = as_linear(e->lhs)) return CrArg{*l, e->rhs->value};
  }
  return std::nullopt;
}

struct Generator {
  const Module& m;
  const std::map<std::string, ExtractedProgram>& programs;
  const std::map<std::string, FunctionArgs>& args;
  const EnergyModel& model;
  const CrOptions& opts;
  Namer name;
  CostRelationSystem sys;

  Generator(const Module& mod, const std::map<std::string, ExtractedProgram>& progs,
            const std::map<std::string, FunctionArgs>& fargs, const EnergyModel& em,
            const CrOptions& o)
      : m(mod), programs(progs), args(fargs), model(em), opts(o), name(mod) {}

  void run() {
    sys.constant = program_constant(model);
    for (const auto& f : m.functions) {
      const ExtractedProgram& prog = programs.at(f.name);
      const ExtractedUnit& residual = prog.residual();
      const std::string& e = residual.cfg.entry();
      sys.entry[f.name] = name(f.name, e, residual.is_call_node(e));
      if (opts.default_assumptions)
        for (const auto& p : f.params)
          sys.assumptions[f.name].push_back(
              LinearConstraint{-LinearForm::var(p), CmpOp::Le});
      auto extra = opts.extra_assumptions.find(f.name);
      if (extra != opts.extra_assumptions.end())
        for (const auto& c : extra->second) sys.assumptions[f.name].push_back(c);
    }
    for (const auto& f : m.functions) gen_function(f, programs.at(f.name));
  }

  void add(CrRelation rel) {
    sys.index[rel.name] = sys.relations.size();
    sys.relations.push_back(std::move(rel));
  }

  void gen_function(const Function& f, const ExtractedProgram& prog) {
    const FunctionArgs& fa = args.at(f.name);
    for (const auto& u : prog.units) {
      const UnitArgs& ua = fa.by_unit.at(u.name);
      for (const auto& label : u.cfg.nodes) {
        if (u.is_call_node(label))
          add(gen_call_node(f, prog, fa, u, ua, label));
        else
          add(gen_block(f, fa, u, ua, label));
      }
    }
  }

  /// Operand expressed symbolically after `bb` in the approximation mode.
  /// When the approximation changed the expression (a remainder summarized
  /// as its halving midpoint), the floor is marked amortized: that midpoint
  /// is only reached every second concrete step.
  std::optional<CrArg> arg_of(const BasicBlock& bb, const Operand& o) {
    SymExprPtr e = seval(bb, o, opts.arg_mode);
    auto arg = to_cr_arg(e);
    if (arg && !arg->is_affine() && opts.arg_mode != ModApprox::Exact &&
        sym_text(e) != sym_text(seval(bb, o, ModApprox::Exact)))
      arg->amort = 2;
    return arg;
  }

  /// Argument list for entering `target` from `bb`: each target parameter is
  /// renamed through the target's phis (incoming for pred `pred`), then
  /// expressed symbolically after `bb` in the approximation mode.
  std::vector<std::optional<CrArg>> edge_args(const BasicBlock& bb, const std::string& pred,
                                              const BasicBlock& target,
                                              const std::vector<std::string>& target_params) {
    std::vector<std::optional<CrArg>> out;
    for (const auto& q : target_params) {
      Operand o = Operand::variable(q);
      if (const Phi* phi = target.phi_for(q)) {
        bool found = false;
        for (const auto& in : phi->incomings) {
          if (in.pred == pred) {
            o = in.value;
            found = true;
            break;
          }
        }
        if (!found) {
          out.push_back(std::nullopt);
          continue;
        }
      }
      out.push_back(arg_of(bb, o));
    }
    return out;
  }

  /// Resume arguments after an extracted loop returns: the caller knows only
  /// its own parameters, so the rename is at operand level (the loop's
  /// computed values are not expressible here).
  std::vector<std::optional<CrArg>> resume_args(const BasicBlock& target,
                                                const std::vector<std::string>& target_params,
                                                const std::string& exit_from,
                                                const std::vector<std::string>& known) {
    std::vector<std::optional<CrArg>> out;
    for (const auto& q : target_params) {
      Operand o = Operand::variable(q);
      if (const Phi* phi = target.phi_for(q)) {
        bool found = false;
        for (const auto& in : phi->incomings) {
          if (in.pred == exit_from) {
            o = in.value;
            found = true;
            break;
          }
        }
        if (!found) {
          out.push_back(std::nullopt);
          continue;
        }
      }
      if (o.kind == Operand::Kind::Lit) {
        out.push_back(CrArg{LinearForm::konst(Rat(o.lit)), 1});
      } else if (std::find(known.begin(), known.end(), o.var) != known.end()) {
        out.push_back(CrArg{LinearForm::var(o.var), 1});
      } else {
        out.push_back(std::nullopt);
      }
    }
    return out;
  }

  /// Guard of an edge leaving `bb`; empty for unconditional edges. A branch
  /// condition that is not affine is dropped (guard over-approximates).
  std::vector<LinearConstraint> edge_guard(const BasicBlock& bb, EdgeKind kind,
                                           const std::string& origin, bool& exact) {
    if (kind != EdgeKind::True && kind != EdgeKind::False) return {};
    const CondBr* cb = bb.terminator().as<CondBr>();
    if (!cb) return {};
    SymExprPtr pred = seval(bb, cb->pred, ModApprox::Exact);
    auto g = guard_from_pred(pred, kind == EdgeKind::True);
    if (!g) {
      exact = false;
      std::string w = origin + ": branch condition " + sym_text(pred) +
                      " is not affine; guard over-approximated";
      // Both edges of the branch trip this; one note is enough.
      if (std::find(sys.warnings.begin(), sys.warnings.end(), w) == sys.warnings.end())
        sys.warnings.push_back(std::move(w));
      return {};
    }
    return {*g};
  }

  /// Calls made by instructions inside the block (externals are priced into
  /// the block cost, not modeled as relations).
  std::vector<CrCall> mid_calls(const Function& f, const BasicBlock& bb,
                                const std::string& origin) {
    std::vector<CrCall> out;
    for (const auto& inst : bb.insts) {
      const Call* c = inst.as<Call>();
      if (!c) continue;
      const Function* callee = m.function(c->callee);
      if (!callee) continue;
      if (callee->params.size() != c->args.size())
        throw AnalysisError(ErrorKind::Validation,
                            origin + ": call to @" + c->callee + " passes " +
                                std::to_string(c->args.size()) + " arguments, expected " +
                                std::to_string(callee->params.size()));
      CrCall call;
      call.name = sys.entry.at(c->callee);
      for (const auto& a : c->args) call.args.push_back(arg_of(bb, a));
      out.push_back(std::move(call));
    }
    (void)f;
    return out;
  }

  CrRelation gen_block(const Function& f, const FunctionArgs& fa, const ExtractedUnit& u,
                       const UnitArgs& ua, const std::string& label) {
    const BasicBlock& bb = *f.block(label);
    std::string origin = f.name + ":" + label;
    CrRelation rel;
    rel.name = name(f.name, label, false);
    rel.fn = f.name;
    rel.params = ua.args_in.at(label);
    Rat cost = block_cost(m, f, bb, model);
    std::vector<CrCall> mids = mid_calls(f, bb, origin);

    auto emit = [&](EdgeKind kind, const std::string* target) {
      CrEquation eq;
      eq.cost = cost;
      eq.calls = mids;
      eq.origin = origin;
      eq.guard = edge_guard(bb, kind, origin, eq.guard_exact);
      if (target) {
        bool node_is_call = u.is_call_node(*target);
        CrCall call;
        call.name = name(f.name, *target, node_is_call);
        call.args = edge_args(bb, label, *f.block(*target), ua.args_in.at(*target));
        eq.calls.push_back(std::move(call));
      }
      rel.equations.push_back(std::move(eq));
    };

    for (int ei : u.cfg.edges_from(u.cfg.node(label))) {
      const Cfg::Edge& e = u.cfg.edges[ei];
      emit(e.kind, &u.cfg.nodes[e.to]);
    }
    for (const auto& ex : u.exits)
      if (ex.from == label) emit(ex.kind, nullptr);
    if (rel.equations.empty()) emit(EdgeKind::Uncond, nullptr);
    return rel;
  }

  CrRelation gen_call_node(const Function& f, const ExtractedProgram& prog,
                           const FunctionArgs& fa, const ExtractedUnit& u, const UnitArgs& ua,
                           const std::string& label) {
    const CallSite& cs = u.calls.at(label);
    const ExtractedUnit* inner = prog.unit(cs.callee);
    const UnitArgs& inner_ua = fa.by_unit.at(cs.callee);
    std::string origin = f.name + ":" + label;

    CrRelation rel;
    rel.name = name(f.name, label, true);
    rel.fn = f.name;
    rel.params = ua.args_in.at(label);

    CrCall inner_call;
    inner_call.name =
        name(f.name, inner->cfg.entry(), inner->is_call_node(inner->cfg.entry()));
    for (const auto& q : inner_ua.entry_args) {
      if (std::find(rel.params.begin(), rel.params.end(), q) != rel.params.end())
        inner_call.args.push_back(CrArg{LinearForm::var(q), 1});
      else
        inner_call.args.push_back(std::nullopt);
    }

    for (int ei : u.cfg.edges_from(u.cfg.node(label))) {
      const Cfg::Edge& e = u.cfg.edges[ei];
      const std::string& to = u.cfg.nodes[e.to];
      CrEquation eq;
      eq.origin = origin;
      eq.calls.push_back(inner_call);
      CrCall resume;
      resume.name = name(f.name, to, u.is_call_node(to));
      resume.args = resume_args(*f.block(to), ua.args_in.at(to), e.exit_from, rel.params);
      eq.calls.push_back(std::move(resume));
      rel.equations.push_back(std::move(eq));
    }
    for (const auto& ex : u.exits) {
      if (ex.from != label) continue;
      CrEquation eq;
      eq.origin = origin;
      eq.calls.push_back(inner_call);
      rel.equations.push_back(std::move(eq));
    }
    if (rel.equations.empty()) {
      CrEquation eq;
      eq.origin = origin;
      eq.calls.push_back(inner_call);
      rel.equations.push_back(std::move(eq));
    }
    return rel;
  }
};

}  // namespace

CostRelationSystem generate_crs(const Module& m,
                                const std::map<std::string, ExtractedProgram>& programs,
                                const std::map<std::string, FunctionArgs>& args,
                                const EnergyModel& model, const CrOptions& opts) {
  Generator g(m, programs, args, model, opts);
  g.run();
  return std::move(g.sys);
}

namespace {

std::string call_text(const CrCall& c) {
  std::string s = c.name + "(";
  for (std::size_t i = 0; i < c.args.size(); ++i) {
    if (i) s += ", ";
    s += c.args[i] ? c.args[i]->text() : "_";
  }
  return s + ")";
}

std::string equation_text(const CrRelation& r, const CrEquation& eq) {
  std::ostringstream os;
  os << r.name << "(";
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    if (i) os << ", ";
    os << r.params[i];
  }
  os << ") = " << rat_decimal_string(eq.cost);
  for (const auto& c : eq.calls) os << " + " << call_text(c);
  if (!eq.guard.empty()) {
    os << "  if ";
    for (std::size_t i = 0; i < eq.guard.size(); ++i) {
      if (i) os << " and ";
      os << eq.guard[i].text();
    }
  }
  if (!eq.guard_exact) os << "  [approx guard]";
  return os.str();
}

}  // namespace

std::string crs_text(const CostRelationSystem& sys) {
  std::ostringstream os;
  for (const auto& r : sys.relations) {
    for (const auto& eq : r.equations) os << equation_text(r, eq) << "\n";
    os << "\n";
  }
  for (const auto& [fn, rel] : sys.entry) os << "entry @" << fn << ": " << rel << "\n";
  for (const auto& [fn, cs] : sys.assumptions) {
    if (cs.empty()) continue;
    os << "assume @" << fn << ":";
    for (std::size_t i = 0; i < cs.size(); ++i) os << (i ? ", " : " ") << cs[i].text();
    os << "\n";
  }
  if (sys.constant != 0) os << "constant: " << rat_decimal_string(sys.constant) << "\n";
  for (const auto& w : sys.warnings) os << "warning: " << w << "\n";
  return os.str();
}

nlohmann::json crs_json(const CostRelationSystem& sys) {
  nlohmann::json rels = nlohmann::json::array();
  for (const auto& r : sys.relations) {
    nlohmann::json eqs = nlohmann::json::array();
    for (const auto& eq : r.equations) {
      nlohmann::json calls = nlohmann::json::array();
      for (const auto& c : eq.calls) {
        nlohmann::json cargs = nlohmann::json::array();
        for (const auto& a : c.args) {
          if (!a) {
            cargs.push_back(nullptr);
          } else {
            nlohmann::json aj = {{"num", lf_json(a->num)}, {"div", a->div.str()}};
            if (a->amort != 1) aj["amort"] = a->amort.str();
            cargs.push_back(std::move(aj));
          }
        }
        calls.push_back({{"name", c.name}, {"args", cargs}});
      }
      nlohmann::json guard = nlohmann::json::array();
      for (const auto& g : eq.guard) guard.push_back(constraint_json(g));
      eqs.push_back({{"cost", rat_string(eq.cost)},
                     {"calls", calls},
                     {"guard", guard},
                     {"exact", eq.guard_exact},
                     {"origin", eq.origin},
                     {"text", equation_text(r, eq)}});
    }
    rels.push_back({{"name", r.name}, {"fn", r.fn}, {"params", r.params}, {"equations", eqs}});
  }
  nlohmann::json assume = nlohmann::json::object();
  for (const auto& [fn, cs] : sys.assumptions) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : cs) arr.push_back(constraint_json(c));
    assume[fn] = arr;
  }
  return {{"relations", rels},
          {"entry", sys.entry},
          {"assumptions", assume},
          {"constant", rat_string(sys.constant)},
          {"warnings", sys.warnings}};
}

CostRelationSystem crs_from_json(const nlohmann::json& j) {
  try {
    CostRelationSystem sys;
    for (const auto& rj : j.at("relations")) {
      CrRelation r;
      r.name = rj.at("name").get<std::string>();
      r.fn = rj.value("fn", std::string());
      r.params = rj.at("params").get<std::vector<std::string>>();
      for (const auto& ej : rj.at("equations")) {
        CrEquation eq;
        eq.cost = rat_from_text(ej.at("cost").get<std::string>());
        for (const auto& cj : ej.at("calls")) {
          CrCall c;
          c.name = cj.at("name").get<std::string>();
          for (const auto& aj : cj.at("args")) {
            if (aj.is_null()) {
              c.args.push_back(std::nullopt);
            } else {
              CrArg a;
              a.num = lf_from_json(aj.at("num"));
              a.div = Int(aj.at("div").get<std::string>());
              if (aj.contains("amort")) a.amort = Int(aj.at("amort").get<std::string>());
              c.args.push_back(std::move(a));
            }
          }
          eq.calls.push_back(std::move(c));
        }
        for (const auto& gj : ej.at("guard")) eq.guard.push_back(constraint_from_json(gj));
        eq.guard_exact = ej.value("exact", true);
        eq.origin = ej.value("origin", std::string());
        r.equations.push_back(std::move(eq));
      }
      sys.index[r.name] = sys.relations.size();
      sys.relations.push_back(std::move(r));
    }
    sys.entry = j.at("entry").get<std::map<std::string, std::string>>();
    if (j.contains("assumptions"))
      for (const auto& [fn, arr] : j.at("assumptions").items())
        for (const auto& cj : arr) sys.assumptions[fn].push_back(constraint_from_json(cj));
    sys.constant = rat_from_text(j.value("constant", std::string("0")));
    if (j.contains("warnings")) sys.warnings = j.at("warnings").get<std::vector<std::string>>();
    return sys;
  } catch (const nlohmann::json::exception& e) {
    throw AnalysisError(ErrorKind::Validation, std::string("cost relation JSON: ") + e.what());
  }
}

}  // namespace ergo
