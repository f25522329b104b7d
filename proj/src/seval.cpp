#include "ergo/seval.hpp"

#include "ergo/error.hpp"

#include <unordered_map>
#include <unordered_set>

namespace ergo {

namespace {

SymOp sym_op_for(Opcode op) {
  switch (op) {
    case Opcode::Add: return SymOp::Add;
    case Opcode::Sub: return SymOp::Sub;
    case Opcode::Mul: return SymOp::Mul;
    case Opcode::SDiv: return SymOp::Div;
    case Opcode::SRem: return SymOp::Mod;
    case Opcode::Shl: return SymOp::Shl;
    case Opcode::LShr: return SymOp::LShr;
    case Opcode::And: return SymOp::And;
    case Opcode::Or: return SymOp::Or;
    case Opcode::Xor: return SymOp::Xor;
    case Opcode::ICmpEq: return SymOp::Eq;
    case Opcode::ICmpNe: return SymOp::Ne;
    case Opcode::ICmpSlt: return SymOp::Lt;
    case Opcode::ICmpSle: return SymOp::Le;
    case Opcode::ICmpSgt: return SymOp::Gt;
    case Opcode::ICmpSge: return SymOp::Ge;
    case Opcode::Select: break;
  }
  throw AnalysisError(ErrorKind::Eval, "opcode has no expression form");
}

struct Evaluator {
  const BasicBlock& bb;
  ModApprox mode;
  std::unordered_map<std::string, const Instruction*> defs;
  std::unordered_map<std::string, SymExprPtr> memo;
  std::unordered_set<std::string> in_progress;

  Evaluator(const BasicBlock& block, ModApprox m) : bb(block), mode(m) {
    for (const auto& inst : bb.insts)
      if (auto dest = defined_var(inst)) defs.emplace(*dest, &inst);
  }

  SymExprPtr mod_node(SymExprPtr l, SymExprPtr r) {
    if (l->kind == SymExpr::Kind::IntConst && r->kind == SymExpr::Kind::IntConst)
      return sym_bin(SymOp::Mod, std::move(l), std::move(r));
    switch (mode) {
      case ModApprox::Exact:
        return sym_bin(SymOp::Mod, std::move(l), std::move(r));
      case ModApprox::Upper:
        return sym_bin(SymOp::Sub, std::move(r), sym_const(1));
      case ModApprox::Lower:
        return sym_const(0);
      case ModApprox::Typical:
        return sym_bin(SymOp::Div, sym_bin(SymOp::Sub, std::move(r), sym_const(1)),
                       sym_const(2));
    }
    return sym_unknown();
  }

  SymExprPtr operand(const Operand& o) {
    if (!o.is_var()) return sym_const(o.lit);
    return variable(o.var);
  }

  SymExprPtr variable(const std::string& v) {
    if (auto it = memo.find(v); it != memo.end()) return it->second;
    auto def = defs.find(v);
    SymExprPtr result;
    if (def == defs.end()) {
      result = sym_var(v);  // defined outside the block: an entry value
    } else if (def->second->is<Phi>()) {
      result = sym_var(v);  // phi results are entry values of their own block
    } else if (def->second->is<Call>() || def->second->is<MemLoad>()) {
      result = sym_unknown();
    } else {
      const Op& op = *def->second->as<Op>();
      if (!in_progress.insert(v).second)
        throw AnalysisError(ErrorKind::Eval,
                            "%" + v + " used before its definition in block " + bb.label);
      if (op.op == Opcode::Select) {
        result = sym_select(operand(op.args[0]), operand(op.args[1]), operand(op.args[2]));
      } else if (op.op == Opcode::SRem) {
        result = mod_node(operand(op.args[0]), operand(op.args[1]));
      } else {
        result = sym_bin(sym_op_for(op.op), operand(op.args[0]), operand(op.args[1]));
      }
      in_progress.erase(v);
    }
    memo.emplace(v, result);
    return result;
  }
};

}  // namespace

const char* mod_approx_name(ModApprox m) {
  switch (m) {
    case ModApprox::Exact: return "exact";
    case ModApprox::Upper: return "upper";
    case ModApprox::Lower: return "lower";
    case ModApprox::Typical: return "typical";
  }
  return "?";
}

SymExprPtr seval(const BasicBlock& bb, const std::string& v, ModApprox mode) {
  return Evaluator(bb, mode).variable(v);
}

SymExprPtr seval(const BasicBlock& bb, const Operand& v, ModApprox mode) {
  return Evaluator(bb, mode).operand(v);
}

}  // namespace ergo
