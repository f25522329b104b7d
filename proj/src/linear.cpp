#include "ergo/linear.hpp"

#include "ergo/error.hpp"

#include <algorithm>
#include <sstream>

namespace ergo {

namespace mp = boost::multiprecision;

LinearForm LinearForm::var(const std::string& name, Rat coeff) {
  LinearForm f;
  if (coeff != 0) f.coeffs.emplace(name, std::move(coeff));
  return f;
}

LinearForm LinearForm::konst(Rat value) {
  LinearForm f;
  f.constant = std::move(value);
  return f;
}

LinearForm& LinearForm::operator+=(const LinearForm& o) {
  for (const auto& [v, c] : o.coeffs) {
    Rat& mine = coeffs[v];
    mine += c;
    if (mine == 0) coeffs.erase(v);
  }
  constant += o.constant;
  return *this;
}

LinearForm& LinearForm::operator-=(const LinearForm& o) { return *this += -o; }

LinearForm LinearForm::operator+(const LinearForm& o) const {
  LinearForm f = *this;
  f += o;
  return f;
}

LinearForm LinearForm::operator-(const LinearForm& o) const {
  LinearForm f = *this;
  f -= o;
  return f;
}

LinearForm LinearForm::operator*(const Rat& k) const {
  LinearForm f;
  if (k == 0) return f;
  for (const auto& [v, c] : coeffs) f.coeffs.emplace(v, Rat(c * k));
  f.constant = constant * k;
  return f;
}

LinearForm LinearForm::operator-() const { return *this * Rat(-1); }

bool LinearForm::operator==(const LinearForm& o) const {
  return constant == o.constant && coeffs == o.coeffs;
}

Rat LinearForm::coeff(const std::string& name) const {
  auto it = coeffs.find(name);
  return it == coeffs.end() ? Rat(0) : it->second;
}

std::set<std::string> LinearForm::vars() const {
  std::set<std::string> out;
  for (const auto& [v, c] : coeffs) out.insert(v);
  return out;
}

LinearForm LinearForm::subst(const std::map<std::string, LinearForm>& bindings) const {
  LinearForm out = konst(constant);
  for (const auto& [v, c] : coeffs) {
    auto it = bindings.find(v);
    if (it == bindings.end())
      out += var(v, c);
    else
      out += it->second * c;
  }
  return out;
}

Rat LinearForm::eval(const std::map<std::string, Int>& env) const {
  Rat total = constant;
  for (const auto& [v, c] : coeffs) {
    auto it = env.find(v);
    if (it == env.end())
      throw AnalysisError(ErrorKind::Eval, "unbound variable " + v + " in linear form");
    total += c * Rat(it->second);
  }
  return total;
}

std::string LinearForm::text() const {
  std::ostringstream os;
  bool first = true;
  auto append = [&](const Rat& coeff, const std::string& term) {
    bool neg = coeff < 0;
    Rat mag = neg ? Rat(-coeff) : coeff;
    if (first)
      os << (neg ? "-" : "");
    else
      os << (neg ? " - " : " + ");
    if (term.empty())
      os << rat_string(mag);
    else if (mag == 1)
      os << term;
    else
      os << rat_string(mag) << "*" << term;
    first = false;
  };
  for (const auto& [v, c] : coeffs) append(c, v);
  if (constant != 0 || first) append(constant, "");
  return os.str();
}

std::optional<LinearForm> as_linear(const SymExprPtr& e) {
  switch (e->kind) {
    case SymExpr::Kind::IntConst:
      return LinearForm::konst(Rat(e->value));
    case SymExpr::Kind::Var:
      return LinearForm::var(e->var);
    case SymExpr::Kind::Bin: {
      if (e->op == SymOp::Add || e->op == SymOp::Sub) {
        auto l = as_linear(e->lhs);
        auto r = as_linear(e->rhs);
        if (!l || !r) return std::nullopt;
        return e->op == SymOp::Add ? *l + *r : *l - *r;
      }
      if (e->op == SymOp::Mul) {
        if (e->lhs->kind == SymExpr::Kind::IntConst) {
          auto r = as_linear(e->rhs);
          if (!r) return std::nullopt;
          return *r * Rat(e->lhs->value);
        }
        if (e->rhs->kind == SymExpr::Kind::IntConst) {
          auto l = as_linear(e->lhs);
          if (!l) return std::nullopt;
          return *l * Rat(e->rhs->value);
        }
      }
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

const char* cmp_op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

bool LinearConstraint::eval(const std::map<std::string, Int>& env) const {
  Rat v = form.eval(env);
  switch (op) {
    case CmpOp::Eq: return v == 0;
    case CmpOp::Ne: return v != 0;
    case CmpOp::Lt: return v < 0;
    case CmpOp::Le: return v <= 0;
    case CmpOp::Gt: return v > 0;
    case CmpOp::Ge: return v >= 0;
  }
  return false;
}

bool LinearConstraint::operator==(const LinearConstraint& o) const {
  return op == o.op && form == o.form;
}

std::string LinearConstraint::text() const {
  LinearForm lhs, rhs;
  for (const auto& [v, c] : form.coeffs) {
    if (c > 0)
      lhs.coeffs.emplace(v, c);
    else
      rhs.coeffs.emplace(v, Rat(-c));
  }
  if (form.constant > 0)
    lhs.constant = form.constant;
  else
    rhs.constant = -form.constant;
  return lhs.text() + " " + cmp_op_text(op) + " " + rhs.text();
}

LinearConstraint negate_constraint(const LinearConstraint& c) {
  switch (c.op) {
    case CmpOp::Eq: return {c.form, CmpOp::Ne};
    case CmpOp::Ne: return {c.form, CmpOp::Eq};
    case CmpOp::Lt: return {c.form, CmpOp::Ge};
    case CmpOp::Le: return {c.form, CmpOp::Gt};
    case CmpOp::Gt: return {c.form, CmpOp::Le};
    case CmpOp::Ge: return {c.form, CmpOp::Lt};
  }
  return c;
}

std::optional<LinearConstraint> constraint_from_cmp(CmpOp op, const SymExprPtr& lhs,
                                                    const SymExprPtr& rhs) {
  auto l = as_linear(lhs);
  auto r = as_linear(rhs);
  if (!l || !r) return std::nullopt;
  return LinearConstraint{*l - *r, op};
}

namespace {

std::optional<CmpOp> cmp_of_sym(SymOp op) {
  switch (op) {
    case SymOp::Eq: return CmpOp::Eq;
    case SymOp::Ne: return CmpOp::Ne;
    case SymOp::Lt: return CmpOp::Lt;
    case SymOp::Le: return CmpOp::Le;
    case SymOp::Gt: return CmpOp::Gt;
    case SymOp::Ge: return CmpOp::Ge;
    default: return std::nullopt;
  }
}

}  // namespace

std::optional<LinearConstraint> guard_from_pred(const SymExprPtr& pred, bool taken) {
  if (pred->kind == SymExpr::Kind::IntConst) {
    bool truth = (pred->value != 0) == taken;
    // constant guard: 0 = 0 (always) or 1 = 0 (never)
    return LinearConstraint{LinearForm::konst(truth ? 0 : 1), CmpOp::Eq};
  }
  if (pred->kind == SymExpr::Kind::Bin) {
    if (auto op = cmp_of_sym(pred->op)) {
      auto c = constraint_from_cmp(*op, pred->lhs, pred->rhs);
      if (!c) return std::nullopt;
      return taken ? *c : negate_constraint(*c);
    }
  }
  if (auto lin = as_linear(pred))
    return LinearConstraint{*lin, taken ? CmpOp::Ne : CmpOp::Eq};
  return std::nullopt;
}

namespace {

/// form >= 0, or form > 0 when strict.
struct Ineq {
  LinearForm form;
  bool strict = false;
};

/// Scales variable coefficients to coprime integers, then snaps the constant:
/// integer-valued variables make a*x + c >= 0 equivalent to a*x + floor(c) >= 0
/// and a*x + c > 0 equivalent to a*x + ceil(c) - 1 >= 0.
Ineq tighten(Ineq q) {
  if (q.form.coeffs.empty()) return q;
  Int scale = 1;
  for (const auto& [v, c] : q.form.coeffs)
    scale = mp::lcm(scale, Int(mp::denominator(c)));
  if (scale != 1) q.form = q.form * Rat(scale);
  Int g = 0;
  for (const auto& [v, c] : q.form.coeffs) g = mp::gcd(g, Int(mp::numerator(c)));
  if (g > 1) q.form = q.form * (Rat(1) / Rat(g));
  if (q.strict) {
    q.form.constant = Rat(rat_ceil(q.form.constant) - 1);
    q.strict = false;
  } else {
    q.form.constant = Rat(rat_floor(q.form.constant));
  }
  return q;
}

/// Fourier-Motzkin elimination; true when the system has no solution.
/// Every combination step re-tightens, which decides integer infeasibility
/// for the one-variable-per-guard systems the solver produces.
bool fm_unsat(std::vector<Ineq> sys) {
  for (auto& q : sys) q = tighten(q);
  while (true) {
    std::vector<Ineq> pending;
    std::string var;
    for (const auto& q : sys) {
      if (q.form.coeffs.empty()) {
        bool ok = q.strict ? q.form.constant > 0 : q.form.constant >= 0;
        if (!ok) return true;
      } else if (var.empty()) {
        var = q.form.coeffs.begin()->first;
      }
    }
    if (var.empty()) return false;  // only satisfied constants remain

    std::vector<Ineq> lower, upper, rest;
    for (auto& q : sys) {
      Rat a = q.form.coeff(var);
      if (a > 0)
        lower.push_back(std::move(q));
      else if (a < 0)
        upper.push_back(std::move(q));
      else
        rest.push_back(std::move(q));
    }
    for (const auto& lo : lower) {
      Rat a_lo = lo.form.coeff(var);
      for (const auto& up : upper) {
        Rat a_up = up.form.coeff(var);  // negative
        Ineq combined;
        combined.form = lo.form * -a_up + up.form * a_lo;
        combined.strict = lo.strict || up.strict;
        rest.push_back(tighten(std::move(combined)));
      }
    }
    sys = std::move(rest);
  }
}

void lower_constraint(const LinearConstraint& c, std::vector<Ineq>& out,
                      std::vector<const LinearConstraint*>& splits) {
  switch (c.op) {
    case CmpOp::Ge: out.push_back({c.form, false}); break;
    case CmpOp::Gt: out.push_back({c.form, true}); break;
    case CmpOp::Le: out.push_back({-c.form, false}); break;
    case CmpOp::Lt: out.push_back({-c.form, true}); break;
    case CmpOp::Eq:
      out.push_back({c.form, false});
      out.push_back({-c.form, false});
      break;
    case CmpOp::Ne: splits.push_back(&c); break;
  }
}

bool unsat_with_splits(std::vector<Ineq> base,
                       const std::vector<const LinearConstraint*>& splits, std::size_t i) {
  if (i == splits.size()) return fm_unsat(std::move(base));
  // form != 0 over the integers: form > 0 or form < 0
  std::vector<Ineq> pos = base;
  pos.push_back({splits[i]->form, true});
  if (!unsat_with_splits(std::move(pos), splits, i + 1)) return false;
  base.push_back({-splits[i]->form, true});
  return unsat_with_splits(std::move(base), splits, i + 1);
}

}  // namespace

bool definitely_unsat(const std::vector<LinearConstraint>& conjunction) {
  std::vector<Ineq> base;
  std::vector<const LinearConstraint*> splits;
  for (const auto& c : conjunction) lower_constraint(c, base, splits);
  return unsat_with_splits(std::move(base), splits, 0);
}

bool implies(const std::vector<LinearConstraint>& ctx, const LinearConstraint& c) {
  std::vector<LinearConstraint> counter = ctx;
  counter.push_back(negate_constraint(c));
  return definitely_unsat(counter);
}

}  // namespace ergo
