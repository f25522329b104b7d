#pragma once

#include "ergo/numeric.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>

namespace ergo {

enum class SymOp {
  Add,
  Sub,
  Mul,
  Div,  // truncating integer division, floor on the nonnegative domain
  Mod,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  And,
  Or,
  Xor,
  Shl,
  LShr,
};

const char* sym_op_text(SymOp op);

struct SymExpr;
using SymExprPtr = std::shared_ptr<const SymExpr>;

/// Immutable expression tree produced by symbolic block evaluation.
/// Comparisons evaluate to 0/1; Unknown stands for values the analysis does
/// not track (memory loads, call results).
struct SymExpr {
  enum class Kind { IntConst, Var, Unknown, Bin, Select };
  Kind kind = Kind::Unknown;
  Int value;         // IntConst
  std::string var;   // Var
  SymOp op = SymOp::Add;
  SymExprPtr lhs, rhs;             // Bin
  SymExprPtr cond, vtrue, vfalse;  // Select
};

SymExprPtr sym_const(Int v);
SymExprPtr sym_var(std::string name);
SymExprPtr sym_unknown();

/// Simplifying constructors: constant folding, arithmetic identities on
/// effect-free operands, Unknown absorption (the mod rule lives in seval).
SymExprPtr sym_bin(SymOp op, SymExprPtr lhs, SymExprPtr rhs);
SymExprPtr sym_select(SymExprPtr cond, SymExprPtr vtrue, SymExprPtr vfalse);

bool sym_equal(const SymExprPtr& a, const SymExprPtr& b);

/// True when evaluation can never raise (no division, mod, shifts, or
/// bitwise ops, which reject negative operands).
bool sym_effect_free(const SymExprPtr& e);

/// Variables referenced by the expression.
std::set<std::string> ref(const SymExprPtr& e);

/// Normalizes linear subtrees to a canonical sum-of-terms shape and folds
/// select with constant or equal arms. Non-linear subtrees stay opaque.
/// Evaluation under any environment is unchanged.
SymExprPtr sym_simplify(const SymExprPtr& e);

/// Evaluates under env; nullopt if any Unknown influences the result.
/// Division by zero and negative/oversized shifts throw AnalysisError(Eval),
/// matching the concrete interpreter.
std::optional<Int> sym_eval(const SymExprPtr& e, const std::map<std::string, Int>& env);

/// "(%i.0 + 1) == %l" style text; the outermost node is unparenthesized.
std::string sym_text(const SymExprPtr& e);

}  // namespace ergo
