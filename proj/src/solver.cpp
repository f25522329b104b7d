#include "ergo/solver.hpp"

#include "ergo/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace ergo {

namespace {

/// Fresh variable standing for the iteration counter while summing; IR
/// identifiers never contain '$'.
const char* kIter = "$t";

struct Unsolvable {
  std::string reason;
};

std::string join_params(const std::vector<std::string>& ps) {
  std::string s;
  for (std::size_t i = 0; i < ps.size(); ++i) s += (i ? ", " : "") + ps[i];
  return s;
}

/// One collapsed header-to-header (or header-to-exit) path through a
/// recursive group: accumulated cost, conjoined guard, and for recursive
/// paths the composed update of every header parameter.
struct RecPath {
  ClosedForm cost;
  std::vector<LinearConstraint> guard;
  std::map<std::string, std::optional<CrArg>> update;
};

struct BasePath {
  ClosedForm cost;
  std::vector<LinearConstraint> guard;
};

std::string guard_key(const std::vector<LinearConstraint>& g) {
  std::vector<std::string> parts;
  for (const auto& c : g) parts.push_back(c.form.text() + " " + cmp_op_text(c.op) + " 0");
  std::sort(parts.begin(), parts.end());
  std::string s;
  for (const auto& p : parts) s += p + ";";
  return s;
}

struct Solver {
  const CostRelationSystem& sys;
  SolveOutcome out;

  explicit Solver(const CostRelationSystem& s) : sys(s) {}

  // --- dependency order -------------------------------------------------

  std::vector<std::vector<int>> sccs;  // callee-first order

  void condense() {
    int n = static_cast<int>(sys.relations.size());
    std::vector<std::vector<int>> succ(n);
    for (int i = 0; i < n; ++i) {
      for (const auto& eq : sys.relations[i].equations) {
        for (const auto& c : eq.calls) {
          auto it = sys.index.find(c.name);
          if (it != sys.index.end()) succ[i].push_back(static_cast<int>(it->second));
        }
      }
    }
    // Tarjan; components complete in callee-first order.
    std::vector<int> idx(n, -1), low(n, 0), stk;
    std::vector<bool> on(n, false);
    int counter = 0;
    auto dfs = [&](auto&& self, int v) -> void {
      idx[v] = low[v] = counter++;
      stk.push_back(v);
      on[v] = true;
      for (int w : succ[v]) {
        if (idx[w] < 0) {
          self(self, w);
          low[v] = std::min(low[v], low[w]);
        } else if (on[w]) {
          low[v] = std::min(low[v], idx[w]);
        }
      }
      if (low[v] == idx[v]) {
        std::vector<int> comp;
        while (true) {
          int w = stk.back();
          stk.pop_back();
          on[w] = false;
          comp.push_back(w);
          if (w == v) break;
        }
        sccs.push_back(std::move(comp));
      }
    };
    for (int i = 0; i < n; ++i)
      if (idx[i] < 0) dfs(dfs, i);
  }

  // --- shared helpers ----------------------------------------------------

  /// Function assumptions restricted to constraints readable in the given
  /// parameter space (parameter names are stable across a function's
  /// relations, so a surviving constraint means the same thing there).
  std::vector<LinearConstraint> assumptions_for(const CrRelation& r) const {
    std::vector<LinearConstraint> out;
    auto it = sys.assumptions.find(r.fn);
    if (it == sys.assumptions.end()) return out;
    std::set<std::string> params(r.params.begin(), r.params.end());
    for (const auto& c : it->second) {
      bool ok = true;
      for (const auto& v : c.form.vars()) ok = ok && params.count(v) != 0;
      if (ok) out.push_back(c);
    }
    return out;
  }

  /// Solved form of `name` with `args` substituted for its parameters.
  /// ctx (caller variables) discharges max(0,.) and domain obligations.
  ClosedForm apply_form(const std::string& name,
                        const std::vector<std::optional<CrArg>>& args,
                        const std::vector<LinearConstraint>& ctx) {
    auto uit = out.unsolved.find(name);
    if (uit != out.unsolved.end())
      throw Unsolvable{"depends on " + name + ": " + uit->second};
    auto fit = out.forms.find(name);
    const CrRelation* callee = sys.relation(name);
    if (fit == out.forms.end() || !callee)
      throw Unsolvable{"depends on " + name + ", which has no closed form"};
    if (args.size() != callee->params.size())
      throw Unsolvable{"call to " + name + " has " + std::to_string(args.size()) +
                       " arguments for parameters (" + join_params(callee->params) + ")"};
    const ClosedForm& form = fit->second;
    std::set<std::string> used = cf_params(form);
    std::map<std::string, ClosedForm> images;
    for (std::size_t k = 0; k < args.size(); ++k) {
      const std::string& p = callee->params[k];
      if (!args[k]) {
        if (used.count(p))
          throw Unsolvable{"argument " + p + " of " + name + " is not expressible at a call site"};
        continue;
      }
      images[p] = args[k]->is_affine() ? cf_linear(args[k]->num)
                                       : cf_floor(args[k]->num, args[k]->div);
    }
    auto res = cf_subst(form, images, ctx);
    if (!res)
      throw Unsolvable{"substitution into " + name + " needs an affine argument where a floor or max was passed"};
    return *res;
  }

  // --- non-recursive relations -------------------------------------------

  void solve_straight(const CrRelation& r) {
    try {
      std::vector<LinearConstraint> assume = assumptions_for(r);
      std::vector<ClosedForm> arms;
      for (const auto& eq : r.equations) {
        std::vector<LinearConstraint> ctx = assume;
        ctx.insert(ctx.end(), eq.guard.begin(), eq.guard.end());
        ClosedForm rhs = cf_const(eq.cost);
        for (const auto& call : eq.calls) rhs = cf_add(rhs, apply_form(call.name, call.args, ctx));
        arms.push_back(std::move(rhs));
      }
      if (arms.empty()) arms.push_back(cf_const(0));
      out.forms[r.name] = arms.size() == 1 ? std::move(arms[0]) : cf_max(std::move(arms), assume);
    } catch (const Unsolvable& u) {
      out.unsolved[r.name] = u.reason;
    }
  }

  // --- recursive groups ----------------------------------------------------

  /// arg composed through subst (callee argument rewritten into header
  /// parameters). Floors pass through only unchanged; anything non-affine
  /// beyond that is unknown.
  static std::optional<CrArg> compose_arg(
      const std::optional<CrArg>& arg,
      const std::map<std::string, std::optional<CrArg>>& subst) {
    if (!arg) return std::nullopt;
    // Identity/pass-through: a bare variable takes its image unchanged.
    if (arg->is_affine() && arg->num.constant == 0 && arg->num.coeffs.size() == 1 &&
        arg->num.coeffs.begin()->second == 1) {
      auto it = subst.find(arg->num.coeffs.begin()->first);
      return it == subst.end() ? std::nullopt : it->second;
    }
    LinearForm num = LinearForm::konst(arg->num.constant);
    for (const auto& [v, c] : arg->num.coeffs) {
      auto it = subst.find(v);
      if (it == subst.end() || !it->second || !it->second->is_affine()) return std::nullopt;
      num += it->second->num * c;
    }
    return CrArg{num, arg->div, arg->amort};
  }

  static std::optional<LinearConstraint> compose_constraint(
      const LinearConstraint& c, const std::map<std::string, std::optional<CrArg>>& subst) {
    LinearForm form = LinearForm::konst(c.form.constant);
    for (const auto& [v, k] : c.form.coeffs) {
      auto it = subst.find(v);
      if (it == subst.end() || !it->second || !it->second->is_affine()) return std::nullopt;
      form += it->second->num * k;
    }
    return LinearConstraint{form, c.op};
  }

  void solve_scc(const std::vector<int>& comp) {
    std::set<std::string> members;
    for (int i : comp) members.insert(sys.relations[i].name);
    std::string header;
    try {
      header = find_header(comp, members);
      solve_header(header, members);
    } catch (const Unsolvable& u) {
      for (int i : comp)
        if (out.forms.find(sys.relations[i].name) == out.forms.end())
          out.unsolved.emplace(sys.relations[i].name, u.reason);
      return;
    }
    // Remaining members recurse only through the now-solved header, so they
    // resolve as straight relations in dependency order.
    bool progress = true;
    while (progress) {
      progress = false;
      for (int i : comp) {
        const CrRelation& r = sys.relations[i];
        if (out.forms.count(r.name) || out.unsolved.count(r.name)) continue;
        bool ready = true;
        for (const auto& eq : r.equations)
          for (const auto& c : eq.calls)
            if (members.count(c.name) && !out.forms.count(c.name) && !out.unsolved.count(c.name))
              ready = false;
        if (!ready) continue;
        solve_straight(r);
        progress = true;
      }
    }
    for (int i : comp) {
      const CrRelation& r = sys.relations[i];
      if (!out.forms.count(r.name) && !out.unsolved.count(r.name))
        out.unsolved[r.name] = "recursion does not reduce to the loop head " + header;
    }
  }

  std::string find_header(const std::vector<int>& comp, const std::set<std::string>& members) {
    std::set<std::string> cands;
    for (const auto& r : sys.relations) {
      if (members.count(r.name)) continue;
      for (const auto& eq : r.equations)
        for (const auto& c : eq.calls)
          if (members.count(c.name)) cands.insert(c.name);
    }
    for (const auto& [fn, rel] : sys.entry)
      if (members.count(rel)) cands.insert(rel);
    if (cands.size() != 1)
      throw Unsolvable{"recursive group with " + std::to_string(cands.size()) +
                       " entry points; expected a single loop head"};
    return *cands.begin();
  }

  void collect_paths(const std::string& header, const std::set<std::string>& members,
                     std::vector<RecPath>& rec, std::vector<BasePath>& base) {
    const CrRelation& hrel = *sys.relation(header);
    std::vector<LinearConstraint> assume = assumptions_for(hrel);

    struct Frame {
      const CrRelation* rel;
      std::map<std::string, std::optional<CrArg>> subst;  // rel params -> header space
      std::vector<LinearConstraint> guard;
      ClosedForm cost;
      std::set<std::string> visited;
    };

    auto walk = [&](auto&& self, const Frame& fr) -> void {
      for (const auto& eq : fr.rel->equations) {
        std::vector<LinearConstraint> guard = fr.guard;
        for (const auto& c : eq.guard) {
          auto sc = compose_constraint(c, fr.subst);
          if (sc) {
            guard.push_back(*sc);
          } else {
            out.warnings.push_back(eq.origin + ": a guard constraint is not expressible at the loop head and was dropped");
          }
        }
        ClosedForm cost = cf_add(fr.cost, cf_const(eq.cost));
        const CrCall* rec_call = nullptr;
        std::vector<LinearConstraint> ctx = assume;
        ctx.insert(ctx.end(), guard.begin(), guard.end());
        for (const auto& call : eq.calls) {
          if (members.count(call.name)) {
            if (rec_call) throw Unsolvable{"two recursive calls on one path (tree recursion)"};
            rec_call = &call;
            continue;
          }
          std::vector<std::optional<CrArg>> cargs;
          for (const auto& a : call.args) cargs.push_back(compose_arg(a, fr.subst));
          cost = cf_add(cost, apply_form(call.name, cargs, ctx));
        }
        if (!rec_call) {
          base.push_back(BasePath{std::move(cost), std::move(guard)});
          continue;
        }
        const CrRelation* target = sys.relation(rec_call->name);
        if (!target) throw Unsolvable{"call to unknown relation " + rec_call->name};
        if (rec_call->args.size() != target->params.size())
          throw Unsolvable{"call to " + rec_call->name + " has wrong arity"};
        std::map<std::string, std::optional<CrArg>> next;
        for (std::size_t k = 0; k < target->params.size(); ++k)
          next[target->params[k]] = compose_arg(rec_call->args[k], fr.subst);
        if (rec_call->name == header) {
          rec.push_back(RecPath{std::move(cost), std::move(guard), std::move(next)});
          continue;
        }
        if (fr.visited.count(rec_call->name))
          throw Unsolvable{"a cycle inside the recursive group bypasses the loop head"};
        Frame nf;
        nf.rel = target;
        nf.subst = std::move(next);
        nf.guard = std::move(guard);
        nf.cost = std::move(cost);
        nf.visited = fr.visited;
        nf.visited.insert(rec_call->name);
        self(self, nf);
      }
    };

    Frame start;
    start.rel = &hrel;
    for (const auto& p : hrel.params) start.subst[p] = CrArg{LinearForm::var(p), 1};
    start.visited.insert(header);
    walk(walk, start);
  }

  /// True when the update keeps the parameter exactly.
  static bool is_identity(const std::string& p, const std::optional<CrArg>& u) {
    return u && u->is_affine() && u->num.constant == 0 && u->num.coeffs.size() == 1 &&
           u->num.coeff(p) == 1;
  }

  void solve_header(const std::string& header, const std::set<std::string>& members) {
    const CrRelation& hrel = *sys.relation(header);
    std::vector<LinearConstraint> assume = assumptions_for(hrel);
    std::vector<RecPath> rec;
    std::vector<BasePath> base;
    collect_paths(header, members, rec, base);
    if (rec.empty()) throw Unsolvable{"recursive group yields no recursive path"};

    // All recursive alternatives must agree on the loop guard; they may
    // differ in cost, which an upper bound maxes over. Updates merge
    // pointwise: a disagreement means the new value is data-dependent, which
    // only matters for the counted parameter.
    for (std::size_t i = 1; i < rec.size(); ++i)
      if (guard_key(rec[i].guard) != guard_key(rec[0].guard))
        throw Unsolvable{"recursive branches disagree on the loop guard"};
    std::map<std::string, std::optional<CrArg>> update = rec[0].update;
    for (std::size_t i = 1; i < rec.size(); ++i)
      for (auto& [p, u] : update)
        if (u && !(rec[i].update.at(p) == u)) u = std::nullopt;
    const auto& guard = rec[0].guard;

    std::vector<LinearConstraint> iter_ctx = assume;
    iter_ctx.insert(iter_ctx.end(), guard.begin(), guard.end());
    std::vector<ClosedForm> cost_arms;
    for (auto& p : rec) cost_arms.push_back(std::move(p.cost));
    ClosedForm periter = cf_max(std::move(cost_arms), iter_ctx);

    // Progressing parameters: everything not kept identically.
    std::set<std::string> moving;
    for (const auto& p : hrel.params)
      if (!is_identity(p, update.at(p))) moving.insert(p);
    if (moving.empty())
      throw Unsolvable{"the loop guard never changes between iterations"};

    // Exactly one guard constraint must read a progressing parameter.
    const LinearConstraint* ranking = nullptr;
    for (const auto& c : guard) {
      bool reads = false;
      for (const auto& v : c.form.vars()) reads = reads || moving.count(v);
      if (!reads) continue;
      if (ranking) throw Unsolvable{"several guard constraints read progressing parameters"};
      ranking = &c;
    }
    if (!ranking)
      throw Unsolvable{"no guard constraint reads a progressing parameter; the loop cannot be counted"};
    std::string r;
    for (const auto& v : ranking->form.vars())
      if (moving.count(v)) {
        if (!r.empty() && r != v)
          throw Unsolvable{"the counting guard reads two progressing parameters (" + r + ", " + v + ")"};
        r = v;
      }
    const std::optional<CrArg>& ru = update.at(r);
    if (!ru) throw Unsolvable{"the update of " + r + " is not expressible"};

    // Cost and exit may read only stable parameters (plus r itself, which
    // the patterns account for).
    for (const auto& p : cf_params(periter))
      if (moving.count(p) && p != r)
        throw Unsolvable{"per-iteration cost reads " + p + ", whose update is not counted"};
    for (const auto& b : base)
      for (const auto& p : cf_params(b.cost))
        if (moving.count(p) && p != r)
          throw Unsolvable{"exit cost reads " + p + ", whose update is not counted"};

    ClosedForm form;
    if (ru->is_affine() && ru->num.coeff(r) == 1 && ru->num.vars() == std::set<std::string>{r}) {
      form = counted_loop(hrel, *ranking, r, ru->num.constant, periter, base, guard, assume);
    } else {
      std::vector<ClosedForm> base_arms;
      for (const auto& b : base) base_arms.push_back(b.cost);
      ClosedForm exit_cost =
          base_arms.empty() ? cf_const(0) : cf_max(std::move(base_arms), assume);
      form = contraction_loop(hrel, *ranking, r, *ru, periter, exit_cost, assume);
    }
    out.forms[header] = std::move(form);
  }

  /// r steps by the constant s until the ranking constraint fails; the cost
  /// of iteration t (ranking value r + s*t) is summed exactly.
  ClosedForm counted_loop(const CrRelation& hrel, const LinearConstraint& ranking,
                          const std::string& r, const Rat& stride, const ClosedForm& periter,
                          const std::vector<BasePath>& base,
                          const std::vector<LinearConstraint>& guard,
                          const std::vector<LinearConstraint>& assume) {
    if (!is_integer(stride)) throw Unsolvable{"stride of " + r + " is not an integer"};
    Int s = rat_floor(stride);
    if (s == 0) throw Unsolvable{"the update of " + r + " is the identity"};

    // Scale the ranking constraint to integer coefficients.
    LinearForm l = ranking.form;
    {
      Int lcm = 1;
      auto fold = [&](const Rat& v) {
        Int d = boost::multiprecision::denominator(v);
        lcm = lcm / boost::multiprecision::gcd(lcm, d) * d;
      };
      for (const auto& [v, c] : l.coeffs) fold(c);
      fold(l.constant);
      l = l * Rat(lcm);
    }
    CmpOp op = ranking.op;
    if (op == CmpOp::Gt || op == CmpOp::Ge) {
      l = -l;
      op = op == CmpOp::Gt ? CmpOp::Lt : CmpOp::Le;
    }
    if (op == CmpOp::Eq) throw Unsolvable{"an equality guard does not count a loop"};
    Rat alpha_r = l.coeff(r);
    Int alpha = rat_floor(alpha_r);
    Int D = alpha * s;
    if (D <= 0)
      throw Unsolvable{"parameter " + r + " moves away from the loop guard; the recursion does not terminate"};

    // Iteration count N = floor(num / D), valid on num >= 0 (N would clamp at
    // zero below that; the obligation is reported as a domain instead so the
    // count stays polynomial inside enclosing loops).
    int strict = op == CmpOp::Lt ? 1 : 0;
    LinearForm num = -l;
    if (op == CmpOp::Ne) {
      // Exact count only for unit steps, and only when the start is on the
      // terminating side (otherwise the value is stepped over).
      if (D != 1) throw Unsolvable{"a disequality guard counts only unit-step loops"};
    } else {
      num.constant += Rat(D - strict);
    }
    ClosedForm n_cf = cf_floor(num, D);
    LinearConstraint count_domain{-num, CmpOp::Le};  // num >= 0

    // Per-iteration cost as a polynomial in the iteration counter. Its domain
    // obligations are handled separately below, by monotonicity.
    ClosedForm periter_clean = periter;
    std::vector<LinearConstraint> periter_domain = std::move(periter_clean.domain);
    periter_clean.domain.clear();
    LinearForm r_at_t = LinearForm::var(r) + LinearForm::var(kIter, Rat(s));
    std::vector<LinearConstraint> iter_ctx = assume;
    for (const auto& c : guard) {
      LinearConstraint shifted{c.form.subst({{r, r_at_t}}), c.op};
      iter_ctx.push_back(shifted);
    }
    iter_ctx.push_back(LinearConstraint{-LinearForm::var(kIter), CmpOp::Le});  // t >= 0
    auto shifted = cf_subst(periter_clean, {{r, cf_linear(r_at_t)}}, iter_ctx);
    if (!shifted)
      throw Unsolvable{"per-iteration cost does not stay affine when the counter is advanced"};

    std::map<int, ClosedForm> by_power;
    for (const auto& t : shifted->terms) {
      int k = 0;
      CfTerm rest;
      rest.coeff = t.coeff;
      for (const auto& f : t.factors) {
        if (f.kind == CfFactor::Kind::Param && f.param == kIter) {
          k += f.power;
          continue;
        }
        bool uses_iter = false;
        switch (f.kind) {
          case CfFactor::Kind::Floor:
          case CfFactor::Kind::Log2:
            uses_iter = f.arg.coeff(kIter) != 0;
            break;
          case CfFactor::Kind::Max: {
            for (const auto& arm : *f.arms) uses_iter = uses_iter || cf_params(arm).count(kIter);
            break;
          }
          default: break;
        }
        if (uses_iter)
          throw Unsolvable{"per-iteration cost is not polynomial in the iteration counter (a max, floor, or log survived)"};
        rest.factors.push_back(f);
      }
      if (k > 8) throw Unsolvable{"cost polynomial degree exceeds the supported bound"};
      ClosedForm piece;
      piece.terms.push_back(rest);
      auto it = by_power.find(k);
      if (it == by_power.end())
        by_power.emplace(k, std::move(piece));
      else
        it->second = cf_add(it->second, piece);
    }

    // sum over t in [0, N) of the per-iteration polynomial, as a function of
    // the count (needed at both N and N-1).
    auto total_for = [&](const ClosedForm& count) {
      int max_pow = 0;
      for (const auto& [k, cf] : by_power) max_pow = std::max(max_pow, k + 1);
      std::vector<ClosedForm> pows;
      pows.push_back(cf_const(1));
      for (int j = 1; j <= max_pow; ++j) pows.push_back(cf_pow(count, j));
      ClosedForm total;
      for (const auto& [k, coeff_cf] : by_power) {
        const std::vector<Rat>& F = faulhaber(k);
        for (std::size_t j = 0; j < F.size(); ++j) {
          if (F[j] == 0) continue;
          total = cf_add(total, cf_scale(cf_mul(coeff_cf, pows[j]), F[j]));
        }
      }
      return total;
    };

    // Exit alternatives. When the step resolves the exact exit value of r
    // (|D| = 1), an exit whose guard cannot hold there -- nor on immediate
    // loop-entry failure -- is only reachable one iteration short of the
    // count; charging it at N-1 keeps the bound tight without losing
    // soundness (the max below still covers it).
    bool refine = D == 1;
    LinearForm r_exit_form;  // value of r after the loop, regime "N iterations"
    if (refine) {
      Rat l_exit = op == CmpOp::Ne ? Rat(0) : Rat(1 - strict);
      LinearForm c_form = l;
      c_form.coeffs.erase(r);
      r_exit_form = (LinearForm::konst(l_exit) - c_form) * Rat(s);
    }
    auto exit_arm = [&](const BasePath& b, const ClosedForm& count) {
      if (!cf_params(b.cost).count(r)) return b.cost;
      ClosedForm r_final = cf_add(cf_param(r), cf_scale(count, Rat(s)));
      auto sub = cf_subst(b.cost, {{r, r_final}}, assume);
      if (!sub) throw Unsolvable{"exit cost does not compose with the final value of " + r};
      return *sub;
    };
    std::vector<ClosedForm> surv, demoted;
    for (const auto& b : base) {
      bool demote = false;
      if (refine && !b.guard.empty()) {
        std::vector<LinearConstraint> at_exit = assume;
        for (const auto& c : b.guard)
          at_exit.push_back(LinearConstraint{c.form.subst({{r, r_exit_form}}), c.op});
        std::vector<LinearConstraint> at_entry = assume;
        at_entry.insert(at_entry.end(), b.guard.begin(), b.guard.end());
        at_entry.push_back(negate_constraint(ranking));
        demote = definitely_unsat(at_exit) && definitely_unsat(at_entry);
      }
      if (demote)
        demoted.push_back(exit_arm(b, cf_sub(n_cf, cf_const(1))));
      else
        surv.push_back(exit_arm(b, n_cf));
    }
    if (surv.empty()) {
      surv = std::move(demoted);  // nothing provably reachable: keep all at N
      demoted.clear();
    }

    ClosedForm form = cf_add(total_for(n_cf), cf_max(std::move(surv), assume));
    if (!demoted.empty()) {
      ClosedForm short_arm =
          cf_add(total_for(cf_sub(n_cf, cf_const(1))), cf_max(std::move(demoted), assume));
      form = cf_max({std::move(form), std::move(short_arm)}, assume);
    }

    // Domain obligations: the count itself, then the per-iteration ones. An
    // iteration-dependent constraint moves monotonically with t, so its
    // binding instance is the first or last iteration.
    auto add_domain = [&](const LinearConstraint& c) {
      for (const auto& d : form.domain)
        if (d == c) return;
      if (!implies(assume, c)) form.domain.push_back(c);
    };
    add_domain(count_domain);
    for (const auto& c : periter_domain) {
      Rat drift = c.form.coeff(r) * Rat(s);
      if (drift <= 0) {
        add_domain(c);  // binding at the first iteration, where r is unshifted
        continue;
      }
      auto nl = cf_as_linear(n_cf);
      if (!nl)
        throw Unsolvable{"a per-iteration domain obligation cannot be checked at the last iteration"};
      LinearForm last_r = LinearForm::var(r) + (*nl - LinearForm::konst(1)) * Rat(s);
      add_domain(LinearConstraint{c.form.subst({{r, last_r}}), c.op});
    }
    (void)hrel;
    return form;
  }

  /// r contracts to floor((a*r + c)/d) with a/d <= 1/2, reaching 0 from any
  /// r >= 1 within floor(log2 r) + 1 steps.
  ClosedForm contraction_loop(const CrRelation& hrel, const LinearConstraint& ranking,
                              const std::string& r, const CrArg& u, const ClosedForm& periter,
                              const ClosedForm& exit_cost,
                              const std::vector<LinearConstraint>& assume) {
    Rat a_n = u.num.coeff(r);
    if (u.num.vars() != std::set<std::string>{r})
      throw Unsolvable{"the update of " + r + " mixes in another parameter"};
    Rat c_n = u.num.constant;
    Rat d(u.div);
    if (!(a_n > 0 && a_n * 2 <= d && c_n <= 0 && a_n + c_n >= 0))
      throw Unsolvable{"the update of " + r + " (" + u.text() +
                       ") is neither a constant stride nor a halving contraction"};
    // The guard (with the assumptions) must keep r at least 1 while looping.
    std::vector<LinearConstraint> ctx = assume;
    ctx.push_back(ranking);
    LinearConstraint at_least_one{LinearForm::konst(1) - LinearForm::var(r), CmpOp::Le};
    if (!implies(ctx, at_least_one))
      throw Unsolvable{"the guard does not bound " + r + " away from zero; the contraction cannot be counted"};
    if (cf_params(periter).count(r))
      throw Unsolvable{"per-iteration cost depends on the contracted parameter " + r};
    if (cf_params(exit_cost).count(r))
      throw Unsolvable{"exit cost depends on the contracted parameter " + r};
    // r at least halves every amort iterations, so at most
    // amort * (log2(r) + 1) iterations run before it reaches zero.
    ClosedForm n_cf = cf_scale(cf_add(cf_log2(LinearForm::var(r)), cf_const(1)), Rat(u.amort));
    ClosedForm form = cf_add(cf_mul(periter, n_cf), exit_cost);
    bool known = false;
    for (const auto& dcon : form.domain) known = known || dcon == at_least_one;
    if (!known && !implies(assume, at_least_one)) form.domain.push_back(at_least_one);
    (void)hrel;
    return form;
  }

  // --- driver --------------------------------------------------------------

  void run() {
    condense();
    for (const auto& comp : sccs) {
      bool self_loop = false;
      if (comp.size() == 1) {
        const CrRelation& r = sys.relations[comp[0]];
        for (const auto& eq : r.equations)
          for (const auto& c : eq.calls) self_loop = self_loop || c.name == r.name;
      }
      if (comp.size() == 1 && !self_loop)
        solve_straight(sys.relations[comp[0]]);
      else
        solve_scc(comp);
    }
    for (const auto& [fn, rel] : sys.entry) {
      auto it = out.forms.find(rel);
      if (it == out.forms.end()) continue;
      std::vector<LinearConstraint> assume;
      auto ait = sys.assumptions.find(fn);
      if (ait != sys.assumptions.end()) assume = ait->second;
      ClosedForm ef = cf_collapse_or_restrict(it->second, assume);
      out.entry_forms[fn] = cf_add(ef, cf_const(sys.constant));
    }
  }
};

}  // namespace

SolveOutcome solve(const CostRelationSystem& sys) {
  Solver s(sys);
  s.run();
  return std::move(s.out);
}

// --- numeric unrolling -------------------------------------------------------

namespace {

struct NumericEval {
  const CostRelationSystem& sys;
  const NumericOptions& opts;
  long steps = 0;
  std::map<std::string, Rat> memo;

  static std::string key_of(const std::string& rel, const std::vector<std::optional<Rat>>& args) {
    std::string k = rel + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) k += ",";
      k += args[i] ? rat_string(*args[i]) : "?";
    }
    return k + ")";
  }

  std::optional<bool> guard_holds(const CrEquation& eq,
                                  const std::map<std::string, std::optional<Rat>>& env) const {
    bool any_unknown = false;
    for (const auto& c : eq.guard) {
      Rat v = c.form.constant;
      bool unknown = false;
      for (const auto& [name, coeff] : c.form.coeffs) {
        auto it = env.find(name);
        if (it == env.end() || !it->second) {
          unknown = true;
          break;
        }
        v += coeff * *it->second;
      }
      if (unknown) {
        any_unknown = true;
        continue;
      }
      bool ok = false;
      switch (c.op) {
        case CmpOp::Eq: ok = v == 0; break;
        case CmpOp::Ne: ok = v != 0; break;
        case CmpOp::Lt: ok = v < 0; break;
        case CmpOp::Le: ok = v <= 0; break;
        case CmpOp::Gt: ok = v > 0; break;
        case CmpOp::Ge: ok = v >= 0; break;
      }
      if (!ok) return false;
    }
    if (any_unknown) return std::nullopt;
    return true;
  }

  std::optional<Rat> arg_value(const CrArg& a,
                               const std::map<std::string, std::optional<Rat>>& env) const {
    Rat v = a.num.constant;
    for (const auto& [name, coeff] : a.num.coeffs) {
      auto it = env.find(name);
      if (it == env.end() || !it->second) return std::nullopt;
      v += coeff * *it->second;
    }
    if (a.div != 1) v = Rat(rat_floor(v / Rat(a.div)));
    return v;
  }

  Rat eval(const std::string& rel, const std::vector<std::optional<Rat>>& args) {
    std::string key = key_of(rel, args);
    auto hit = memo.find(key);
    if (hit != memo.end()) return hit->second;
    if (++steps > opts.budget)
      throw AnalysisError(ErrorKind::NonTerminating,
                          "numeric unrolling exceeded " + std::to_string(opts.budget) +
                              " equation applications at " + key);
    const CrRelation* r = sys.relation(rel);
    if (!r) throw AnalysisError(ErrorKind::Validation, "unknown relation " + rel);
    if (args.size() != r->params.size())
      throw AnalysisError(ErrorKind::Validation, "wrong argument count for " + rel);
    std::map<std::string, std::optional<Rat>> env;
    for (std::size_t i = 0; i < args.size(); ++i) env[r->params[i]] = args[i];

    std::vector<const CrEquation*> applicable;
    for (const auto& eq : r->equations) {
      auto holds = guard_holds(eq, env);
      if (!holds) {
        if (opts.mode == EvalMode::Deterministic)
          throw AnalysisError(ErrorKind::Nondeterministic,
                              "a guard of " + rel + " reads a value the unrolling cannot determine");
        applicable.push_back(&eq);  // possibly applicable: worst mode keeps it
      } else if (*holds) {
        applicable.push_back(&eq);
      }
    }
    if (opts.mode == EvalMode::Deterministic && applicable.size() != 1)
      throw AnalysisError(ErrorKind::Nondeterministic,
                          rel + " at " + key + " has " + std::to_string(applicable.size()) +
                              " applicable equations in deterministic mode");
    Rat best = 0;
    bool first = true;
    for (const CrEquation* eq : applicable) {
      Rat v = eq->cost;
      for (const auto& call : eq->calls) {
        std::vector<std::optional<Rat>> cargs;
        for (const auto& a : call.args)
          cargs.push_back(a ? arg_value(*a, env) : std::nullopt);
        v += eval(call.name, cargs);
      }
      if (first || v > best) best = v;
      first = false;
    }
    memo.emplace(key, best);
    return best;
  }
};

}  // namespace

Rat evaluate_numeric(const CostRelationSystem& sys, const std::string& rel,
                     const std::vector<Rat>& args, const NumericOptions& opts) {
  NumericEval ev{sys, opts};
  std::vector<std::optional<Rat>> a;
  a.reserve(args.size());
  for (const auto& v : args) a.push_back(v);
  return ev.eval(rel, a);
}

}  // namespace ergo
