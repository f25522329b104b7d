#pragma once

#include "ergo/error.hpp"
#include "ergo/linear.hpp"
#include "ergo/numeric.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ergo {

struct ClosedForm;

/// One multiplicative factor of a closed-form term.
///
/// Param   p^power
/// Floor   floor(arg / div)^power, div >= 2 (div 1 folds into the term)
/// Log2    log2(arg)^power, arg evaluated >= 1
/// Max     max(arms...)^power
struct CfFactor {
  enum class Kind { Param, Floor, Log2, Max };

  Kind kind = Kind::Param;
  std::string param;
  LinearForm arg;
  Int div = 1;
  std::shared_ptr<const std::vector<ClosedForm>> arms;
  int power = 1;

  /// Identity of the factor ignoring `power`; equal keys merge under
  /// multiplication.
  std::string key() const;
  std::string text() const;
};

/// coeff * product(factors); factors kept sorted by key, powers merged.
struct CfTerm {
  Rat coeff = 1;
  std::vector<CfFactor> factors;

  bool is_constant() const { return factors.empty(); }
  std::string key() const;
};

/// Sum of terms, plus the domain on which the form is claimed: outside any
/// domain constraint evaluation refuses rather than returning a wrong value.
/// Terms are kept merged (unique keys) and zero coefficients dropped.
struct ClosedForm {
  std::vector<CfTerm> terms;
  std::vector<LinearConstraint> domain;

  bool is_zero() const { return terms.empty(); }
  /// The constant value when no term mentions a parameter.
  std::optional<Rat> constant() const;
  std::string text() const;
};

ClosedForm cf_const(const Rat& v);
ClosedForm cf_param(const std::string& name);
ClosedForm cf_linear(const LinearForm& l);
/// floor(num / div) as a form; div >= 1 (1 degenerates to the affine form).
ClosedForm cf_floor(const LinearForm& num, const Int& div);
ClosedForm cf_log2(const LinearForm& arg);

ClosedForm cf_add(const ClosedForm& a, const ClosedForm& b);
ClosedForm cf_sub(const ClosedForm& a, const ClosedForm& b);
ClosedForm cf_scale(const ClosedForm& a, const Rat& k);
ClosedForm cf_mul(const ClosedForm& a, const ClosedForm& b);
ClosedForm cf_pow(const ClosedForm& a, int k);

/// Structural equality on merged normal forms.
bool cf_equal(const ClosedForm& a, const ClosedForm& b);

/// The affine image of the form, when every term is a constant or a single
/// first-power parameter.
std::optional<LinearForm> cf_as_linear(const ClosedForm& a);

/// Parameters read anywhere in the form (including inside floor/log/max).
std::set<std::string> cf_params(const ClosedForm& a);

/// max of the alternatives. Duplicate arms merge; an arm provably dominated
/// by another under `ctx` (difference affine and nonnegative) is dropped; a
/// single survivor is returned plainly. Arm domains are hoisted to the result.
ClosedForm cf_max(std::vector<ClosedForm> arms, const std::vector<LinearConstraint>& ctx);

/// max(0, a), collapsed to `a` when ctx entails a >= 0.
ClosedForm cf_max_zero(const ClosedForm& a, const std::vector<LinearConstraint>& ctx);

/// Rewrites max(0, q) factors whose nonnegativity ctx entails into plain q.
ClosedForm cf_collapse(const ClosedForm& a, const std::vector<LinearConstraint>& ctx);

/// Like cf_collapse, but a max(0, q) factor that cannot be discharged is
/// still replaced by q when q has an affine or single-floor nonnegativity
/// witness, which is then recorded in the result's domain. Used on entry
/// formulas, where a polynomial answer plus an explicit validity domain is
/// preferred over a max.
ClosedForm cf_collapse_or_restrict(const ClosedForm& a, const std::vector<LinearConstraint>& ctx);

/// Substitutes parameters by whole forms. Parameters without an image stay
/// themselves. Inside floor/log2 arguments only affine images compose;
/// anything else yields nullopt. `ctx` (in image variables) collapses
/// max(0, .) factors that the substitution settles.
std::optional<ClosedForm> cf_subst(const ClosedForm& a,
                                   const std::map<std::string, ClosedForm>& images,
                                   const std::vector<LinearConstraint>& ctx);

/// Highest total power of `p` across terms; max arms contribute the power of
/// their highest arm, floor/log2 arguments reading p count as 1 per power.
int cf_degree(const ClosedForm& a, const std::string& p);
bool cf_has_kind(const ClosedForm& a, CfFactor::Kind k);

/// Exact value at an integer point. Throws AnalysisError(DomainViolation)
/// naming the violated constraint when the point is outside the domain, and
/// AnalysisError(Eval) for log2 of a value below 1.
Rat cf_eval(const ClosedForm& a, const std::map<std::string, Int>& env);

/// Coefficients of sum(t = 0 .. N-1) t^k as a polynomial in N, degree k+1,
/// index = power of N.
const std::vector<Rat>& faulhaber(int k);

nlohmann::json cf_json(const ClosedForm& a);

/// parse_rat that throws AnalysisError(Validation) instead of nullopt.
Rat rat_from_text(const std::string& text);

nlohmann::json lf_json(const LinearForm& l);
LinearForm lf_from_json(const nlohmann::json& j);
nlohmann::json constraint_json(const LinearConstraint& c);
LinearConstraint constraint_from_json(const nlohmann::json& j);

Rat linear_eval_rat(const LinearForm& l, const std::map<std::string, Rat>& env);
bool constraint_eval_rat(const LinearConstraint& c, const std::map<std::string, Rat>& env);

}  // namespace ergo
