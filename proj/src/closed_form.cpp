#include "ergo/closed_form.hpp"

#include <algorithm>
#include <sstream>

namespace ergo {

namespace {

std::string rat_text(const Rat& r) { return rat_decimal_string(r); }

/// Parenthesizes affine arguments with more than one symbol, matching how
/// the forms read in reports: floor((P - 1)/3), log2(b).
std::string arg_text(const LinearForm& l) { return l.text(); }

void sort_factors(std::vector<CfFactor>& fs) {
  std::sort(fs.begin(), fs.end(),
            [](const CfFactor& a, const CfFactor& b) { return a.key() < b.key(); });
}

/// Merges equal-key factors by adding powers; drops power-0 survivors.
void merge_factors(std::vector<CfFactor>& fs) {
  sort_factors(fs);
  std::vector<CfFactor> out;
  for (auto& f : fs) {
    if (!out.empty() && out.back().key() == f.key()) {
      out.back().power += f.power;
    } else {
      out.push_back(std::move(f));
    }
  }
  std::erase_if(out, [](const CfFactor& f) { return f.power == 0; });
  fs = std::move(out);
}

ClosedForm normalized(std::vector<CfTerm> terms) {
  for (auto& t : terms) merge_factors(t.factors);
  std::sort(terms.begin(), terms.end(),
            [](const CfTerm& a, const CfTerm& b) { return a.key() < b.key(); });
  ClosedForm r;
  for (auto& t : terms) {
    if (!r.terms.empty() && r.terms.back().key() == t.key()) {
      r.terms.back().coeff += t.coeff;
    } else {
      r.terms.push_back(std::move(t));
    }
  }
  std::erase_if(r.terms, [](const CfTerm& t) { return t.coeff == 0; });
  return r;
}

void add_domain(ClosedForm& a, const LinearConstraint& c) {
  for (const auto& d : a.domain)
    if (d == c) return;
  a.domain.push_back(c);
}

void merge_domains(ClosedForm& a, const std::vector<LinearConstraint>& dom) {
  for (const auto& c : dom) add_domain(a, c);
}

}  // namespace

std::string CfFactor::key() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Param: os << "p:" << param; break;
    case Kind::Floor: os << "f:(" << arg.text() << ")/" << div; break;
    case Kind::Log2: os << "l:" << arg.text(); break;
    case Kind::Max:
      os << "m:";
      for (const auto& arm : *arms) os << "[" << arm.text() << "]";
      break;
  }
  return os.str();
}

std::string CfFactor::text() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Param: os << param; break;
    case Kind::Floor: os << "floor((" << arg_text(arg) << ")/" << div << ")"; break;
    case Kind::Log2: os << "log2(" << arg_text(arg) << ")"; break;
    case Kind::Max: {
      os << "max(";
      bool first = true;
      for (const auto& arm : *arms) {
        if (!first) os << ", ";
        first = false;
        os << arm.text();
      }
      os << ")";
      break;
    }
  }
  if (power != 1) os << "^" << power;
  return os.str();
}

std::string CfTerm::key() const {
  std::string k;
  for (const auto& f : factors) k += f.key() + "^" + std::to_string(f.power) + ";";
  return k;
}

std::optional<Rat> ClosedForm::constant() const {
  if (terms.empty()) return Rat(0);
  if (terms.size() == 1 && terms[0].is_constant()) return terms[0].coeff;
  return std::nullopt;
}

std::string ClosedForm::text() const {
  if (terms.empty()) return "0";
  // Display highest-degree terms first, constants last.
  std::vector<CfTerm> ordered = terms;
  auto term_degree = [](const CfTerm& t) {
    int d = 0;
    for (const auto& f : t.factors) d += f.power;
    return d;
  };
  std::stable_sort(ordered.begin(), ordered.end(),
                   [&](const CfTerm& a, const CfTerm& b) {
                     int da = term_degree(a), db = term_degree(b);
                     if (da != db) return da > db;
                     return a.key() < b.key();
                   });
  std::ostringstream os;
  bool first = true;
  for (const auto& t : ordered) {
    Rat c = t.coeff;
    if (first) {
      if (c < 0) {
        os << "-";
        c = -c;
      }
    } else {
      os << (c < 0 ? " - " : " + ");
      if (c < 0) c = -c;
    }
    first = false;
    bool need_coeff = t.factors.empty() || c != 1;
    if (need_coeff) os << rat_text(c);
    bool need_star = need_coeff;
    for (const auto& f : t.factors) {
      if (need_star) os << "*";
      os << f.text();
      need_star = true;
    }
  }
  return os.str();
}

ClosedForm cf_const(const Rat& v) {
  ClosedForm r;
  if (v != 0) r.terms.push_back(CfTerm{v, {}});
  return r;
}

ClosedForm cf_param(const std::string& name) {
  CfFactor f;
  f.kind = CfFactor::Kind::Param;
  f.param = name;
  ClosedForm r;
  r.terms.push_back(CfTerm{Rat(1), {f}});
  return r;
}

ClosedForm cf_linear(const LinearForm& l) {
  std::vector<CfTerm> ts;
  for (const auto& [v, c] : l.coeffs) {
    CfFactor f;
    f.kind = CfFactor::Kind::Param;
    f.param = v;
    ts.push_back(CfTerm{c, {f}});
  }
  if (l.constant != 0) ts.push_back(CfTerm{l.constant, {}});
  return normalized(std::move(ts));
}

ClosedForm cf_floor(const LinearForm& num, const Int& div) {
  if (div == 1) return cf_linear(num);
  // Canonical constant offset in [0, div): floor((x + q*div)/div) = floor(x/div) + q.
  Int q = rat_floor(num.constant / Rat(div));
  if (q != 0) {
    LinearForm shifted = num;
    shifted.constant -= Rat(q) * Rat(div);
    return cf_add(cf_const(Rat(q)), cf_floor(shifted, div));
  }
  CfFactor f;
  f.kind = CfFactor::Kind::Floor;
  f.arg = num;
  f.div = div;
  ClosedForm r;
  r.terms.push_back(CfTerm{Rat(1), {f}});
  return r;
}

ClosedForm cf_log2(const LinearForm& arg) {
  CfFactor f;
  f.kind = CfFactor::Kind::Log2;
  f.arg = arg;
  ClosedForm r;
  r.terms.push_back(CfTerm{Rat(1), {f}});
  return r;
}

ClosedForm cf_add(const ClosedForm& a, const ClosedForm& b) {
  std::vector<CfTerm> ts = a.terms;
  ts.insert(ts.end(), b.terms.begin(), b.terms.end());
  ClosedForm r = normalized(std::move(ts));
  r.domain = a.domain;
  merge_domains(r, b.domain);
  return r;
}

ClosedForm cf_sub(const ClosedForm& a, const ClosedForm& b) { return cf_add(a, cf_scale(b, -1)); }

ClosedForm cf_scale(const ClosedForm& a, const Rat& k) {
  if (k == 0) return ClosedForm{{}, a.domain};
  ClosedForm r = a;
  for (auto& t : r.terms) t.coeff *= k;
  return r;
}

ClosedForm cf_mul(const ClosedForm& a, const ClosedForm& b) {
  std::vector<CfTerm> ts;
  for (const auto& x : a.terms) {
    for (const auto& y : b.terms) {
      CfTerm t;
      t.coeff = x.coeff * y.coeff;
      t.factors = x.factors;
      t.factors.insert(t.factors.end(), y.factors.begin(), y.factors.end());
      ts.push_back(std::move(t));
    }
  }
  ClosedForm r = normalized(std::move(ts));
  r.domain = a.domain;
  merge_domains(r, b.domain);
  return r;
}

ClosedForm cf_pow(const ClosedForm& a, int k) {
  ClosedForm r = cf_const(1);
  r.domain = a.domain;
  for (int i = 0; i < k; ++i) r = cf_mul(r, a);
  return r;
}

bool cf_equal(const ClosedForm& a, const ClosedForm& b) {
  if (a.terms.size() != b.terms.size()) return false;
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    if (a.terms[i].coeff != b.terms[i].coeff) return false;
    if (a.terms[i].key() != b.terms[i].key()) return false;
  }
  return true;
}

std::optional<LinearForm> cf_as_linear(const ClosedForm& a) {
  LinearForm l;
  for (const auto& t : a.terms) {
    if (t.factors.empty()) {
      l.constant += t.coeff;
    } else if (t.factors.size() == 1 && t.factors[0].kind == CfFactor::Kind::Param &&
               t.factors[0].power == 1) {
      l += LinearForm::var(t.factors[0].param, t.coeff);
    } else {
      return std::nullopt;
    }
  }
  return l;
}

std::set<std::string> cf_params(const ClosedForm& a) {
  std::set<std::string> out;
  for (const auto& t : a.terms) {
    for (const auto& f : t.factors) {
      switch (f.kind) {
        case CfFactor::Kind::Param: out.insert(f.param); break;
        case CfFactor::Kind::Floor:
        case CfFactor::Kind::Log2:
          for (const auto& v : f.arg.vars()) out.insert(v);
          break;
        case CfFactor::Kind::Max:
          for (const auto& arm : *f.arms) {
            auto p = cf_params(arm);
            out.insert(p.begin(), p.end());
          }
          break;
      }
    }
  }
  for (const auto& c : a.domain)
    for (const auto& v : c.form.vars()) out.insert(v);
  return out;
}

namespace {

/// ctx entails a - b >= 0, decided only when the difference is affine.
bool dominates(const ClosedForm& a, const ClosedForm& b, const std::vector<LinearConstraint>& ctx) {
  ClosedForm d = cf_sub(a, b);
  if (auto c = d.constant()) return *c >= 0;
  auto l = cf_as_linear(d);
  if (!l) return false;
  return implies(ctx, LinearConstraint{-*l, CmpOp::Le});
}

}  // namespace

ClosedForm cf_max(std::vector<ClosedForm> arms, const std::vector<LinearConstraint>& ctx) {
  std::vector<LinearConstraint> dom;
  for (auto& arm : arms) {
    for (const auto& c : arm.domain) dom.push_back(c);
    arm.domain.clear();
  }
  // Dedupe, then drop dominated arms.
  std::vector<ClosedForm> kept;
  for (auto& arm : arms) {
    bool dup = false;
    for (const auto& k : kept) dup = dup || cf_equal(k, arm);
    if (!dup) kept.push_back(std::move(arm));
  }
  std::vector<bool> dead(kept.size(), false);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = 0; j < kept.size(); ++j) {
      if (i == j || dead[i] || dead[j]) continue;
      if (dominates(kept[i], kept[j], ctx)) dead[j] = true;
    }
  }
  std::vector<ClosedForm> live;
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (!dead[i]) live.push_back(std::move(kept[i]));
  ClosedForm r;
  if (live.empty()) {
    // fall through: empty max treated as 0
  } else if (live.size() == 1) {
    r = std::move(live[0]);
  } else {
    CfFactor f;
    f.kind = CfFactor::Kind::Max;
    f.arms = std::make_shared<const std::vector<ClosedForm>>(std::move(live));
    r.terms.push_back(CfTerm{Rat(1), {f}});
  }
  for (const auto& c : dom) add_domain(r, c);
  return r;
}

ClosedForm cf_max_zero(const ClosedForm& a, const std::vector<LinearConstraint>& ctx) {
  return cf_max({cf_const(0), a}, ctx);
}

namespace {

/// A constraint equivalent to q >= 0, when q is affine or a single
/// nonnegatively-scaled floor/param/log-free term: floor(L/d) >= 0 iff L >= 0.
std::optional<LinearConstraint> nonneg_witness(const ClosedForm& q) {
  if (auto l = cf_as_linear(q)) return LinearConstraint{-*l, CmpOp::Le};
  if (q.terms.size() == 1 && q.terms[0].coeff > 0 && q.terms[0].factors.size() == 1) {
    const CfFactor& f = q.terms[0].factors[0];
    if (f.kind == CfFactor::Kind::Floor && f.power == 1)
      return LinearConstraint{-f.arg, CmpOp::Le};
  }
  return std::nullopt;
}

/// Shared engine for cf_collapse / cf_collapse_or_restrict.
ClosedForm collapse_impl(const ClosedForm& a, const std::vector<LinearConstraint>& ctx,
                         bool restrict_domain) {
  ClosedForm acc;  // running sum
  acc.domain = a.domain;
  for (const auto& t : a.terms) {
    ClosedForm term_cf = cf_const(t.coeff);
    for (const auto& f : t.factors) {
      ClosedForm fac;
      if (f.kind == CfFactor::Kind::Max) {
        std::vector<ClosedForm> arms;
        for (const auto& arm : *f.arms) arms.push_back(collapse_impl(arm, ctx, false));
        // max(0, q): collapse when ctx settles q >= 0, or restrict the domain.
        const ClosedForm* zero = nullptr;
        const ClosedForm* other = nullptr;
        if (arms.size() == 2) {
          auto c0 = arms[0].constant(), c1 = arms[1].constant();
          if (c0 && *c0 == 0) {
            zero = &arms[0];
            other = &arms[1];
          } else if (c1 && *c1 == 0) {
            zero = &arms[1];
            other = &arms[0];
          }
        }
        std::optional<LinearConstraint> wit;
        if (zero) wit = nonneg_witness(*other);
        if (zero && wit && implies(ctx, *wit)) {
          fac = cf_pow(*other, f.power);
        } else if (zero && wit && restrict_domain) {
          fac = cf_pow(*other, f.power);
          add_domain(acc, *wit);
        } else {
          fac = cf_pow(cf_max(std::move(arms), ctx), f.power);
        }
      } else {
        CfFactor copy = f;
        fac.terms.push_back(CfTerm{Rat(1), {copy}});
      }
      term_cf = cf_mul(term_cf, fac);
    }
    acc = cf_add(acc, term_cf);
  }
  return acc;
}

}  // namespace

ClosedForm cf_collapse(const ClosedForm& a, const std::vector<LinearConstraint>& ctx) {
  return collapse_impl(a, ctx, false);
}

ClosedForm cf_collapse_or_restrict(const ClosedForm& a, const std::vector<LinearConstraint>& ctx) {
  return collapse_impl(a, ctx, true);
}

namespace {

/// Affine image of a parameter under `images`; identity when absent.
std::optional<LinearForm> linear_image(const std::string& v,
                                       const std::map<std::string, ClosedForm>& images) {
  auto it = images.find(v);
  if (it == images.end()) return LinearForm::var(v);
  return cf_as_linear(it->second);
}

std::optional<LinearForm> subst_linear(const LinearForm& l,
                                       const std::map<std::string, ClosedForm>& images) {
  LinearForm out = LinearForm::konst(l.constant);
  for (const auto& [v, c] : l.coeffs) {
    auto img = linear_image(v, images);
    if (!img) return std::nullopt;
    out += *img * c;
  }
  return out;
}

}  // namespace

std::optional<ClosedForm> cf_subst(const ClosedForm& a,
                                   const std::map<std::string, ClosedForm>& images,
                                   const std::vector<LinearConstraint>& ctx) {
  ClosedForm acc;
  for (const auto& t : a.terms) {
    ClosedForm term_cf = cf_const(t.coeff);
    for (const auto& f : t.factors) {
      ClosedForm fac;
      switch (f.kind) {
        case CfFactor::Kind::Param: {
          auto it = images.find(f.param);
          if (it != images.end()) {
            fac = cf_pow(it->second, f.power);
          } else {
            CfFactor copy = f;
            fac.terms.push_back(CfTerm{Rat(1), {copy}});
          }
          break;
        }
        case CfFactor::Kind::Floor: {
          auto arg = subst_linear(f.arg, images);
          if (!arg) return std::nullopt;
          fac = cf_pow(cf_floor(*arg, f.div), f.power);  // re-canonicalizes the offset
          break;
        }
        case CfFactor::Kind::Log2: {
          auto arg = subst_linear(f.arg, images);
          if (!arg) return std::nullopt;
          CfFactor copy = f;
          copy.arg = *arg;
          fac.terms.push_back(CfTerm{Rat(1), {copy}});
          break;
        }
        case CfFactor::Kind::Max: {
          std::vector<ClosedForm> arms;
          for (const auto& arm : *f.arms) {
            auto s = cf_subst(arm, images, ctx);
            if (!s) return std::nullopt;
            arms.push_back(std::move(*s));
          }
          fac = cf_pow(cf_max(std::move(arms), ctx), f.power);
          break;
        }
      }
      term_cf = cf_mul(term_cf, fac);
    }
    acc = cf_add(acc, term_cf);
  }
  // Domain constraints compose only through affine images.
  for (const auto& c : a.domain) {
    auto form = subst_linear(c.form, images);
    if (!form) return std::nullopt;
    LinearConstraint sc{*form, c.op};
    if (!implies(ctx, sc)) add_domain(acc, sc);
  }
  return cf_collapse(acc, ctx);
}

int cf_degree(const ClosedForm& a, const std::string& p) {
  int deg = 0;
  for (const auto& t : a.terms) {
    int d = 0;
    for (const auto& f : t.factors) {
      switch (f.kind) {
        case CfFactor::Kind::Param:
          if (f.param == p) d += f.power;
          break;
        case CfFactor::Kind::Floor:
          if (f.arg.coeff(p) != 0) d += f.power;
          break;
        case CfFactor::Kind::Log2:
          break;
        case CfFactor::Kind::Max: {
          int best = 0;
          for (const auto& arm : *f.arms) best = std::max(best, cf_degree(arm, p));
          d += best * f.power;
          break;
        }
      }
    }
    deg = std::max(deg, d);
  }
  return deg;
}

bool cf_has_kind(const ClosedForm& a, CfFactor::Kind k) {
  for (const auto& t : a.terms) {
    for (const auto& f : t.factors) {
      if (f.kind == k) return true;
      if (f.kind == CfFactor::Kind::Max)
        for (const auto& arm : *f.arms)
          if (cf_has_kind(arm, k)) return true;
    }
  }
  return false;
}

Rat linear_eval_rat(const LinearForm& l, const std::map<std::string, Rat>& env) {
  Rat v = l.constant;
  for (const auto& [name, c] : l.coeffs) {
    auto it = env.find(name);
    if (it == env.end()) throw AnalysisError(ErrorKind::Eval, "unbound parameter " + name);
    v += c * it->second;
  }
  return v;
}

bool constraint_eval_rat(const LinearConstraint& c, const std::map<std::string, Rat>& env) {
  Rat v = linear_eval_rat(c.form, env);
  switch (c.op) {
    case CmpOp::Eq: return v == 0;
    case CmpOp::Ne: return v != 0;
    case CmpOp::Lt: return v < 0;
    case CmpOp::Le: return v <= 0;
    case CmpOp::Gt: return v > 0;
    case CmpOp::Ge: return v >= 0;
  }
  return false;
}

Rat cf_eval(const ClosedForm& a, const std::map<std::string, Int>& env) {
  std::map<std::string, Rat> renv;
  for (const auto& [k, v] : env) renv.emplace(k, Rat(v));
  for (const auto& c : a.domain) {
    if (!constraint_eval_rat(c, renv))
      throw AnalysisError(ErrorKind::DomainViolation,
                          "formula valid only for " + c.text() + "; point violates it");
  }
  Rat total = 0;
  for (const auto& t : a.terms) {
    Rat v = t.coeff;
    for (const auto& f : t.factors) {
      Rat fv;
      switch (f.kind) {
        case CfFactor::Kind::Param: {
          auto it = renv.find(f.param);
          if (it == renv.end())
            throw AnalysisError(ErrorKind::Eval, "unbound parameter " + f.param);
          fv = it->second;
          break;
        }
        case CfFactor::Kind::Floor:
          fv = Rat(rat_floor(linear_eval_rat(f.arg, renv) / Rat(f.div)));
          break;
        case CfFactor::Kind::Log2: {
          Rat arg = linear_eval_rat(f.arg, renv);
          if (arg < 1)
            throw AnalysisError(ErrorKind::Eval,
                                "log2 of " + rat_decimal_string(arg) + " in " + f.text());
          fv = Rat(ilog2(rat_floor(arg)));
          break;
        }
        case CfFactor::Kind::Max: {
          bool first = true;
          for (const auto& arm : *f.arms) {
            Rat av = cf_eval(arm, env);
            if (first || av > fv) fv = av;
            first = false;
          }
          break;
        }
      }
      for (int i = 0; i < f.power; ++i) v *= fv;
    }
    total += v;
  }
  return total;
}

const std::vector<Rat>& faulhaber(int k) {
  static std::map<int, std::vector<Rat>> memo;
  auto it = memo.find(k);
  if (it != memo.end()) return it->second;
  // sum(t = 0 .. N-1) t^k is a degree k+1 polynomial in N; interpolate it
  // exactly from the points N = 0 .. k+1 by Gaussian elimination.
  int n = k + 2;  // number of coefficients
  std::vector<std::vector<Rat>> m(n, std::vector<Rat>(n + 1, Rat(0)));
  for (int row = 0; row < n; ++row) {
    Int N = row;
    Rat pw = 1;
    for (int col = 0; col < n; ++col) {
      m[row][col] = pw;
      pw *= Rat(N);
    }
    Rat s = 0;
    for (Int t = 0; t < N; ++t) {
      Rat tp = 1;
      for (int i = 0; i < k; ++i) tp *= Rat(t);
      s += tp;
    }
    m[row][n] = s;
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    while (piv < n && m[piv][col] == 0) ++piv;
    std::swap(m[col], m[piv]);
    Rat d = m[col][col];
    for (int j = col; j <= n; ++j) m[col][j] /= d;
    for (int row = 0; row < n; ++row) {
      if (row == col || m[row][col] == 0) continue;
      Rat facr = m[row][col];
      for (int j = col; j <= n; ++j) m[row][j] -= facr * m[col][j];
    }
  }
  std::vector<Rat> coeffs(n);
  for (int i = 0; i < n; ++i) coeffs[i] = m[i][n];
  return memo.emplace(k, std::move(coeffs)).first->second;
}

Rat rat_from_text(const std::string& text) {
  auto r = parse_rat(text);
  if (!r) throw AnalysisError(ErrorKind::Validation, "not a rational: '" + text + "'");
  return *r;
}

nlohmann::json lf_json(const LinearForm& l) {
  nlohmann::json coeffs = nlohmann::json::object();
  for (const auto& [v, c] : l.coeffs) coeffs[v] = rat_string(c);
  return {{"coeffs", coeffs}, {"const", rat_string(l.constant)}};
}

LinearForm lf_from_json(const nlohmann::json& j) {
  LinearForm l;
  for (const auto& [v, c] : j.at("coeffs").items()) {
    Rat r = rat_from_text(c.get<std::string>());
    if (r != 0) l.coeffs[v] = r;
  }
  l.constant = rat_from_text(j.at("const").get<std::string>());
  return l;
}

namespace {

CmpOp cmp_from_text(const std::string& s) {
  if (s == "=") return CmpOp::Eq;
  if (s == "!=") return CmpOp::Ne;
  if (s == "<") return CmpOp::Lt;
  if (s == "<=") return CmpOp::Le;
  if (s == ">") return CmpOp::Gt;
  if (s == ">=") return CmpOp::Ge;
  throw AnalysisError(ErrorKind::Validation, "unknown comparison op '" + s + "'");
}

}  // namespace

nlohmann::json constraint_json(const LinearConstraint& c) {
  return {{"form", lf_json(c.form)}, {"op", cmp_op_text(c.op)}};
}

LinearConstraint constraint_from_json(const nlohmann::json& j) {
  return LinearConstraint{lf_from_json(j.at("form")), cmp_from_text(j.at("op").get<std::string>())};
}

nlohmann::json cf_json(const ClosedForm& a) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : a.terms) {
    nlohmann::json factors = nlohmann::json::array();
    for (const auto& f : t.factors) {
      nlohmann::json fj;
      switch (f.kind) {
        case CfFactor::Kind::Param:
          fj = {{"kind", "param"}, {"name", f.param}};
          break;
        case CfFactor::Kind::Floor:
          fj = {{"kind", "floor"}, {"num", lf_json(f.arg)}, {"div", f.div.str()}};
          break;
        case CfFactor::Kind::Log2:
          fj = {{"kind", "log2"}, {"arg", lf_json(f.arg)}};
          break;
        case CfFactor::Kind::Max: {
          nlohmann::json arms = nlohmann::json::array();
          for (const auto& arm : *f.arms) arms.push_back(cf_json(arm));
          fj = {{"kind", "max"}, {"arms", arms}};
          break;
        }
      }
      fj["power"] = f.power;
      factors.push_back(fj);
    }
    terms.push_back({{"coeff", rat_string(t.coeff)}, {"factors", factors}});
  }
  nlohmann::json dom = nlohmann::json::array();
  for (const auto& c : a.domain) dom.push_back(constraint_json(c));
  return {{"terms", terms}, {"domain", dom}, {"text", a.text()}};
}

}  // namespace ergo
