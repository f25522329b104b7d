#pragma once

#include "ergo/numeric.hpp"
#include "ergo/symexpr.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ergo {

/// Affine form sum(coeffs[v] * v) + constant with exact rational coefficients.
/// Zero coefficients are never stored.
struct LinearForm {
  std::map<std::string, Rat> coeffs;
  Rat constant = 0;

  static LinearForm var(const std::string& name, Rat coeff = 1);
  static LinearForm konst(Rat value);

  LinearForm& operator+=(const LinearForm& o);
  LinearForm& operator-=(const LinearForm& o);
  LinearForm operator+(const LinearForm& o) const;
  LinearForm operator-(const LinearForm& o) const;
  LinearForm operator*(const Rat& k) const;
  LinearForm operator-() const;
  bool operator==(const LinearForm& o) const;

  bool is_constant() const { return coeffs.empty(); }
  /// Coefficient of `name` (0 when absent).
  Rat coeff(const std::string& name) const;
  std::set<std::string> vars() const;

  /// Replaces each variable by the given form; variables without a binding
  /// are kept as themselves.
  LinearForm subst(const std::map<std::string, LinearForm>& bindings) const;

  Rat eval(const std::map<std::string, Int>& env) const;

  /// "2*i - l + 3" with terms in variable order, constant last; "0" if empty.
  std::string text() const;
};

/// Linear subtrees only (add, sub, multiply by constant); nullopt otherwise.
std::optional<LinearForm> as_linear(const SymExprPtr& e);

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

const char* cmp_op_text(CmpOp op);

/// The constraint `form op 0`.
struct LinearConstraint {
  LinearForm form;
  CmpOp op = CmpOp::Eq;

  bool eval(const std::map<std::string, Int>& env) const;
  bool operator==(const LinearConstraint& o) const;

  /// Pretty split form, e.g. "i + 1 < l" rather than "i + 1 - l < 0".
  std::string text() const;
};

LinearConstraint negate_constraint(const LinearConstraint& c);

/// Builds `lhs - rhs op 0` when both comparison sides are linear.
std::optional<LinearConstraint> constraint_from_cmp(CmpOp op, const SymExprPtr& lhs,
                                                    const SymExprPtr& rhs);

/// Guard for a conditional branch on `pred`: the branch is taken when
/// pred != 0. Comparison predicates become the corresponding constraint (or
/// its negation); other linear predicates become pred != 0 / pred == 0.
/// nullopt when the predicate is not linear (mod, div, select, unknown).
std::optional<LinearConstraint> guard_from_pred(const SymExprPtr& pred, bool taken);

/// True when the conjunction has no integer solution. Decided by
/// Fourier-Motzkin elimination over the rationals with integer tightening
/// (all IR variables range over integers); disequalities case-split.
/// "false" means no integer-unsatisfiability was established.
bool definitely_unsat(const std::vector<LinearConstraint>& conjunction);

/// True when ctx entails c over the integers (ctx and not-c is unsat).
bool implies(const std::vector<LinearConstraint>& ctx, const LinearConstraint& c);

}  // namespace ergo
