#include "gup/angular.hpp"

#include <algorithm>
#include <cmath>

namespace gup {
namespace angular {

namespace {

int eps(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((j - i) * (k - i) * (k - j) > 0) ? 1 : -1;
}

Expr rho_squared() {
  Expr r2 = constant(0);
  for (int i = 1; i <= 3; ++i) r2 = add(r2, pow(pvar(i), 2));
  return r2;
}

// rho^2 is itself polynomial in the momenta, so even powers substitute
// without the radical; only odd occurrences keep a sqrt factor. Profiles even
// in rho therefore stay inside the rational ring, which the symbolic layers
// (decomposition, operator promotion) depend on.
Expr subst_rho(const Expr& e, const Expr& r2) {
  switch (e->kind) {
    case ExprKind::Const:
    case ExprKind::Var:
      return e;
    case ExprKind::Param:
      return e->name == "rho" ? sqrt(r2) : e;
    case ExprKind::Pow: {
      if (e->a->kind == ExprKind::Param && e->a->name == "rho") {
        int n = e->exponent;
        bool inverse = n < 0;
        if (inverse) n = -n;
        Expr body = pow(r2, n / 2);
        if (n % 2) body = mul(body, sqrt(r2));
        return inverse ? div(constant(1), body) : body;
      }
      return pow(subst_rho(e->a, r2), e->exponent);
    }
    case ExprKind::Neg:
      return neg(subst_rho(e->a, r2));
    case ExprKind::Sqrt:
      return sqrt(subst_rho(e->a, r2));
    case ExprKind::Exp:
      return exp(subst_rho(e->a, r2));
    case ExprKind::Add:
      return add(subst_rho(e->a, r2), subst_rho(e->b, r2));
    case ExprKind::Sub:
      return sub(subst_rho(e->a, r2), subst_rho(e->b, r2));
    case ExprKind::Mul:
      return mul(subst_rho(e->a, r2), subst_rho(e->b, r2));
    case ExprKind::Div:
      return div(subst_rho(e->a, r2), subst_rho(e->b, r2));
  }
  return e;
}

double max_abs(const GupModel& m, const Expr& e, const std::vector<PhasePoint>& pts) {
  double worst = 0;
  for (const auto& x : pts) worst = std::max(worst, std::abs(eval(e, with_params(m, x))));
  return worst;
}

}  // namespace

AngularScheme build_scheme(const Expr& a, const Expr& f,
                           const std::map<std::string, double>& params,
                           const std::array<Expr, 3>* s) {
  auto radial_only = [&](const Expr& e, const char* what) {
    SymbolSet sym = collect_symbols(e);
    if (!sym.vars.empty())
      throw AngularError(std::string(what) + " must depend on rho and parameters only");
    for (const auto& name : sym.params)
      if (name != "rho" && !params.count(name))
        throw AngularError(std::string(what) + ": parameter '" + name + "' has no value");
  };
  radial_only(a, "a");
  radial_only(f, "f");

  AngularScheme sch;
  sch.a_rho = a;
  sch.f_rho = f;
  sch.s = s ? *s : std::array<Expr, 3>{constant(0), constant(0), constant(0)};

  Expr r2 = rho_squared();
  sch.a_p = subst_rho(a, r2);
  sch.f_p = subst_rho(f, r2);

  // J_k = s_k + (1/f) eps_kmn p_n q_m  (orbital kernel divided by f)
  for (int k = 1; k <= 3; ++k) {
    Expr kernel = constant(0);
    for (int m = 1; m <= 3; ++m)
      for (int n = 1; n <= 3; ++n)
        if (int e = eps(k, m, n))
          kernel = add(kernel, mul(constant(e), mul(pvar(n), qvar(m))));
    sch.J[k - 1] = add(sch.s[k - 1], div(kernel, sch.f_p));
  }

  // induced brackets: L_ij = a eps_ijk J_k
  std::vector<Expr> L;
  for (int i = 1; i <= 3; ++i)
    for (int j = i + 1; j <= 3; ++j) {
      Expr lij = constant(0);
      for (int k = 1; k <= 3; ++k)
        if (int e = eps(i, j, k)) lij = add(lij, mul(constant(e), mul(sch.a_p, sch.J[k - 1])));
      L.push_back(lij);
    }

  sch.model = make_model(3, sch.f_p, std::move(L), params, "angular-scheme");
  return sch;
}

AngularReport check_angular_algebra(const AngularScheme& sch,
                                    const std::vector<PhasePoint>& pts, double tol) {
  AngularReport rep;
  rep.tol = tol;
  const GupModel& m = sch.model;
  for (int i = 1; i <= 3; ++i) {
    for (int j = 1; j <= 3; ++j) {
      Expr want_q = constant(0), want_p = constant(0), want_j = constant(0);
      for (int k = 1; k <= 3; ++k)
        if (int e = eps(i, j, k)) {
          want_q = add(want_q, mul(constant(e), qvar(k)));
          want_p = add(want_p, mul(constant(e), pvar(k)));
          want_j = add(want_j, mul(constant(e), sch.J[k - 1]));
        }
      rep.q_family = std::max(
          rep.q_family, max_abs(m, sub(bracket_expr(m, sch.J[i - 1], qvar(j)), want_q), pts));
      rep.p_family = std::max(
          rep.p_family, max_abs(m, sub(bracket_expr(m, sch.J[i - 1], pvar(j)), want_p), pts));
      if (j > i)
        rep.jj_family = std::max(
            rep.jj_family,
            max_abs(m, sub(bracket_expr(m, sch.J[i - 1], sch.J[j - 1]), want_j), pts));
    }
  }
  rep.pass = rep.q_family <= tol && rep.p_family <= tol && rep.jj_family <= tol;
  return rep;
}

double p_dot_J(const AngularScheme& sch, const PhasePoint& x) {
  double acc = 0;
  for (int k = 0; k < 3; ++k)
    acc += x.p[k] * eval(sch.J[k], with_params(sch.model, x));
  return acc;
}

SDeterminant s_system_determinant(const AngularScheme& sch, const PhasePoint& x) {
  PhasePoint ctx = with_params(sch.model, x);
  double rho2 = 0;
  for (double pv : x.p) rho2 += pv * pv;
  PhasePoint radial;
  radial.params = ctx.params;
  radial.params["rho"] = std::sqrt(rho2);
  double f = eval(sch.f_rho, radial);
  double a = eval(sch.a_rho, radial);
  SDeterminant det;
  det.value = (f * f + a * rho2) / (f * f);
  det.singular = std::abs(f * f + a * rho2) <= 1e-12;
  return det;
}

double rotation_invariance_residual(const AngularScheme& sch, const Expr& H,
                                    const std::vector<PhasePoint>& pts) {
  double worst = 0;
  for (int k = 0; k < 3; ++k)
    worst = std::max(worst, max_abs(sch.model, bracket_expr(sch.model, sch.J[k], H), pts));
  return worst;
}

double shift_system_residual(const AngularScheme& sch, const std::vector<PhasePoint>& pts) {
  // f^2 ds_m/dp_m + a sum_{i != m} s_i p_i = 0      (diagonal)
  // f^2 ds_m/dp_l - a p_l s_m = 0                   (m != l)
  const GupModel& m = sch.model;
  Expr f2 = pow(sch.f_p, 2);
  double worst = 0;
  for (int mm = 1; mm <= 3; ++mm) {
    Expr diag = mul(f2, diff(sch.s[mm - 1], {VarKind::P, mm}));
    Expr cross = constant(0);
    for (int i = 1; i <= 3; ++i)
      if (i != mm) cross = add(cross, mul(sch.s[i - 1], pvar(i)));
    diag = add(diag, mul(sch.a_p, cross));
    worst = std::max(worst, max_abs(m, diag, pts));
    for (int l = 1; l <= 3; ++l) {
      if (l == mm) continue;
      Expr off = sub(mul(f2, diff(sch.s[mm - 1], {VarKind::P, l})),
                     mul(sch.a_p, mul(pvar(l), sch.s[mm - 1])));
      worst = std::max(worst, max_abs(m, off, pts));
    }
  }
  return worst;
}

}  // namespace angular
}  // namespace gup
