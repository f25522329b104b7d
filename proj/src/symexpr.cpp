#include "ergo/symexpr.hpp"

#include "ergo/error.hpp"

#include <sstream>
#include <vector>

namespace ergo {

namespace {

// shifts beyond this are treated as runtime errors, not values
const Int kMaxShift = 1000000;

SymExprPtr make(SymExpr e) { return std::make_shared<const SymExpr>(std::move(e)); }

bool is_const(const SymExprPtr& e, const Int& v) {
  return e->kind == SymExpr::Kind::IntConst && e->value == v;
}

Int cmp_result(bool b) { return b ? 1 : 0; }

/// Exact semantics for two constant operands; nullopt when the operation is a
/// runtime error (division by zero, bad shift, bitwise on negatives) so the
/// caller keeps the node and evaluation reports it instead.
std::optional<Int> fold(SymOp op, const Int& a, const Int& b) {
  switch (op) {
    case SymOp::Add: return a + b;
    case SymOp::Sub: return a - b;
    case SymOp::Mul: return a * b;
    case SymOp::Div:
      if (b == 0) return std::nullopt;
      return a / b;  // truncation toward zero
    case SymOp::Mod:
      if (b == 0) return std::nullopt;
      return a % b;
    case SymOp::Eq: return cmp_result(a == b);
    case SymOp::Ne: return cmp_result(a != b);
    case SymOp::Lt: return cmp_result(a < b);
    case SymOp::Le: return cmp_result(a <= b);
    case SymOp::Gt: return cmp_result(a > b);
    case SymOp::Ge: return cmp_result(a >= b);
    case SymOp::And:
      if (a < 0 || b < 0) return std::nullopt;
      return a & b;
    case SymOp::Or:
      if (a < 0 || b < 0) return std::nullopt;
      return a | b;
    case SymOp::Xor:
      if (a < 0 || b < 0) return std::nullopt;
      return a ^ b;
    case SymOp::Shl:
      if (b < 0 || b > kMaxShift) return std::nullopt;
      return a << static_cast<unsigned>(b);
    case SymOp::LShr:
      if (a < 0 || b < 0 || b > kMaxShift) return std::nullopt;
      return a >> static_cast<unsigned>(b);
  }
  return std::nullopt;
}

}  // namespace

const char* sym_op_text(SymOp op) {
  switch (op) {
    case SymOp::Add: return "+";
    case SymOp::Sub: return "-";
    case SymOp::Mul: return "*";
    case SymOp::Div: return "/";
    case SymOp::Mod: return "mod";
    case SymOp::Eq: return "==";
    case SymOp::Ne: return "!=";
    case SymOp::Lt: return "<";
    case SymOp::Le: return "<=";
    case SymOp::Gt: return ">";
    case SymOp::Ge: return ">=";
    case SymOp::And: return "and";
    case SymOp::Or: return "or";
    case SymOp::Xor: return "xor";
    case SymOp::Shl: return "shl";
    case SymOp::LShr: return "lshr";
  }
  return "?";
}

SymExprPtr sym_const(Int v) {
  SymExpr e;
  e.kind = SymExpr::Kind::IntConst;
  e.value = std::move(v);
  return make(std::move(e));
}

SymExprPtr sym_var(std::string name) {
  SymExpr e;
  e.kind = SymExpr::Kind::Var;
  e.var = std::move(name);
  return make(std::move(e));
}

SymExprPtr sym_unknown() {
  static const SymExprPtr u = make(SymExpr{});
  return u;
}

bool sym_effect_free(const SymExprPtr& e) {
  switch (e->kind) {
    case SymExpr::Kind::IntConst:
    case SymExpr::Kind::Var:
    case SymExpr::Kind::Unknown:
      return true;
    case SymExpr::Kind::Bin:
      switch (e->op) {
        case SymOp::Div:
        case SymOp::Mod:
        case SymOp::Shl:
        case SymOp::LShr:
        case SymOp::And:
        case SymOp::Or:
        case SymOp::Xor:
          return false;
        default:
          return sym_effect_free(e->lhs) && sym_effect_free(e->rhs);
      }
    case SymExpr::Kind::Select:
      return sym_effect_free(e->cond) && sym_effect_free(e->vtrue) && sym_effect_free(e->vfalse);
  }
  return false;
}

SymExprPtr sym_bin(SymOp op, SymExprPtr lhs, SymExprPtr rhs) {
  if (lhs->kind == SymExpr::Kind::IntConst && rhs->kind == SymExpr::Kind::IntConst)
    if (auto v = fold(op, lhs->value, rhs->value)) return sym_const(*v);

  // Unknown absorbs, provided dropping the sibling cannot hide a runtime error
  if ((lhs->kind == SymExpr::Kind::Unknown && sym_effect_free(rhs)) ||
      (rhs->kind == SymExpr::Kind::Unknown && sym_effect_free(lhs)))
    return sym_unknown();

  switch (op) {
    case SymOp::Add:
      if (is_const(lhs, 0)) return rhs;
      if (is_const(rhs, 0)) return lhs;
      break;
    case SymOp::Sub:
      if (is_const(rhs, 0)) return lhs;
      if (sym_equal(lhs, rhs) && sym_effect_free(lhs)) return sym_const(0);
      break;
    case SymOp::Mul:
      if (is_const(lhs, 1)) return rhs;
      if (is_const(rhs, 1)) return lhs;
      if (is_const(lhs, 0) && sym_effect_free(rhs)) return sym_const(0);
      if (is_const(rhs, 0) && sym_effect_free(lhs)) return sym_const(0);
      break;
    case SymOp::Div:
      if (is_const(rhs, 1)) return lhs;
      break;
    case SymOp::Mod:
      if (is_const(rhs, 1) && sym_effect_free(lhs)) return sym_const(0);
      break;
    case SymOp::Shl:
    case SymOp::LShr:
      if (is_const(rhs, 0)) return lhs;
      break;
    case SymOp::Eq:
    case SymOp::Le:
    case SymOp::Ge:
      if (sym_equal(lhs, rhs) && sym_effect_free(lhs)) return sym_const(1);
      break;
    case SymOp::Ne:
    case SymOp::Lt:
    case SymOp::Gt:
      if (sym_equal(lhs, rhs) && sym_effect_free(lhs)) return sym_const(0);
      break;
    default:
      break;
  }

  SymExpr e;
  e.kind = SymExpr::Kind::Bin;
  e.op = op;
  e.lhs = std::move(lhs);
  e.rhs = std::move(rhs);
  return make(std::move(e));
}

SymExprPtr sym_select(SymExprPtr cond, SymExprPtr vtrue, SymExprPtr vfalse) {
  if (cond->kind == SymExpr::Kind::IntConst)
    return cond->value != 0 ? vtrue : vfalse;
  if (cond->kind == SymExpr::Kind::Unknown && sym_equal(vtrue, vfalse) &&
      sym_effect_free(vtrue))
    return vtrue;
  if (cond->kind == SymExpr::Kind::Unknown &&
      sym_effect_free(vtrue) && sym_effect_free(vfalse) &&
      !sym_equal(vtrue, vfalse))
    return sym_unknown();
  if (sym_equal(vtrue, vfalse) && sym_effect_free(cond)) return vtrue;
  SymExpr e;
  e.kind = SymExpr::Kind::Select;
  e.cond = std::move(cond);
  e.vtrue = std::move(vtrue);
  e.vfalse = std::move(vfalse);
  return make(std::move(e));
}

bool sym_equal(const SymExprPtr& a, const SymExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case SymExpr::Kind::IntConst: return a->value == b->value;
    case SymExpr::Kind::Var: return a->var == b->var;
    case SymExpr::Kind::Unknown: return true;
    case SymExpr::Kind::Bin:
      return a->op == b->op && sym_equal(a->lhs, b->lhs) && sym_equal(a->rhs, b->rhs);
    case SymExpr::Kind::Select:
      return sym_equal(a->cond, b->cond) && sym_equal(a->vtrue, b->vtrue) &&
             sym_equal(a->vfalse, b->vfalse);
  }
  return false;
}

std::set<std::string> ref(const SymExprPtr& e) {
  std::set<std::string> out;
  std::vector<const SymExpr*> work{e.get()};
  while (!work.empty()) {
    const SymExpr* cur = work.back();
    work.pop_back();
    switch (cur->kind) {
      case SymExpr::Kind::Var: out.insert(cur->var); break;
      case SymExpr::Kind::Bin:
        work.push_back(cur->lhs.get());
        work.push_back(cur->rhs.get());
        break;
      case SymExpr::Kind::Select:
        work.push_back(cur->cond.get());
        work.push_back(cur->vtrue.get());
        work.push_back(cur->vfalse.get());
        break;
      default:
        break;
    }
  }
  return out;
}

namespace {

/// Linear accumulation with integer coefficients over Add/Sub/Mul-by-const
/// chains. Anything else makes the subtree non-linear.
struct LinAcc {
  std::map<std::string, Int> coeffs;
  Int constant = 0;
};

bool acc_linear(const SymExprPtr& e, const Int& scale, LinAcc& acc) {
  switch (e->kind) {
    case SymExpr::Kind::IntConst:
      acc.constant += scale * e->value;
      return true;
    case SymExpr::Kind::Var:
      acc.coeffs[e->var] += scale;
      return true;
    case SymExpr::Kind::Bin:
      if (e->op == SymOp::Add)
        return acc_linear(e->lhs, scale, acc) && acc_linear(e->rhs, scale, acc);
      if (e->op == SymOp::Sub)
        return acc_linear(e->lhs, scale, acc) && acc_linear(e->rhs, Int(-scale), acc);
      if (e->op == SymOp::Mul) {
        if (e->lhs->kind == SymExpr::Kind::IntConst)
          return acc_linear(e->rhs, Int(scale * e->lhs->value), acc);
        if (e->rhs->kind == SymExpr::Kind::IntConst)
          return acc_linear(e->lhs, Int(scale * e->rhs->value), acc);
      }
      return false;
    default:
      return false;
  }
}

/// Rebuilds constant + c1*v1 + c2*v2 + ... sorted by variable name.
SymExprPtr rebuild_linear(const LinAcc& acc) {
  SymExprPtr out;
  auto append = [&](SymExprPtr term, bool negative) {
    if (!out) {
      out = negative ? sym_bin(SymOp::Sub, sym_const(0), std::move(term)) : std::move(term);
      return;
    }
    out = sym_bin(negative ? SymOp::Sub : SymOp::Add, out, std::move(term));
  };
  if (acc.constant != 0) append(sym_const(acc.constant), false);
  for (const auto& [var, coeff] : acc.coeffs) {
    if (coeff == 0) continue;
    Int mag = coeff < 0 ? Int(-coeff) : coeff;
    SymExprPtr term = mag == 1 ? sym_var(var) : sym_bin(SymOp::Mul, sym_const(mag), sym_var(var));
    append(std::move(term), coeff < 0);
  }
  if (!out) out = sym_const(0);
  return out;
}

bool is_linear_op(SymOp op) { return op == SymOp::Add || op == SymOp::Sub || op == SymOp::Mul; }

}  // namespace

SymExprPtr sym_simplify(const SymExprPtr& e) {
  switch (e->kind) {
    case SymExpr::Kind::IntConst:
    case SymExpr::Kind::Var:
    case SymExpr::Kind::Unknown:
      return e;
    case SymExpr::Kind::Bin: {
      if (is_linear_op(e->op)) {
        LinAcc acc;
        if (acc_linear(e, Int(1), acc)) return rebuild_linear(acc);
      }
      return sym_bin(e->op, sym_simplify(e->lhs), sym_simplify(e->rhs));
    }
    case SymExpr::Kind::Select:
      return sym_select(sym_simplify(e->cond), sym_simplify(e->vtrue), sym_simplify(e->vfalse));
  }
  return e;
}

std::optional<Int> sym_eval(const SymExprPtr& e, const std::map<std::string, Int>& env) {
  switch (e->kind) {
    case SymExpr::Kind::IntConst:
      return e->value;
    case SymExpr::Kind::Var: {
      auto it = env.find(e->var);
      if (it == env.end())
        throw AnalysisError(ErrorKind::Eval, "unbound variable %" + e->var);
      return it->second;
    }
    case SymExpr::Kind::Unknown:
      return std::nullopt;
    case SymExpr::Kind::Bin: {
      auto l = sym_eval(e->lhs, env);
      auto r = sym_eval(e->rhs, env);
      if (!l || !r) return std::nullopt;
      if (auto v = fold(e->op, *l, *r)) return v;
      throw AnalysisError(ErrorKind::Eval, std::string("invalid operands for ") +
                                               sym_op_text(e->op) + " (" + l->str() + ", " +
                                               r->str() + ")");
    }
    case SymExpr::Kind::Select: {
      auto c = sym_eval(e->cond, env);
      if (!c) return std::nullopt;
      return sym_eval(*c != 0 ? e->vtrue : e->vfalse, env);
    }
  }
  return std::nullopt;
}

std::string sym_text(const SymExprPtr& e) {
  auto child = [](const SymExprPtr& c) {
    std::string body = sym_text(c);
    if (c->kind == SymExpr::Kind::Bin) return "(" + body + ")";
    return body;
  };
  switch (e->kind) {
    case SymExpr::Kind::IntConst:
      return e->value.str();
    case SymExpr::Kind::Var:
      return "%" + e->var;
    case SymExpr::Kind::Unknown:
      return "?";
    case SymExpr::Kind::Bin:
      return child(e->lhs) + " " + sym_op_text(e->op) + " " + child(e->rhs);
    case SymExpr::Kind::Select:
      return "select(" + sym_text(e->cond) + ", " + sym_text(e->vtrue) + ", " +
             sym_text(e->vfalse) + ")";
  }
  return "?";
}

}  // namespace ergo
