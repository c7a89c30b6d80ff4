#include "gup/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace gup {
namespace solver {

namespace {

std::vector<double> origin_like(const std::vector<double>& target) {
  return std::vector<double>(target.size(), 0.0);
}

}  // namespace

PathSpec PathSpec::axis_polyline(const std::vector<double>& target) {
  PathSpec p;
  std::vector<double> cur = origin_like(target);
  p.waypoints.push_back(cur);
  for (std::size_t i = 0; i < target.size(); ++i) {
    cur[i] = target[i];
    p.waypoints.push_back(cur);
  }
  return p;
}

PathSpec PathSpec::axis_polyline_reversed(const std::vector<double>& target) {
  PathSpec p;
  std::vector<double> cur = origin_like(target);
  p.waypoints.push_back(cur);
  for (std::size_t k = target.size(); k-- > 0;) {
    cur[k] = target[k];
    p.waypoints.push_back(cur);
  }
  return p;
}

PathSpec PathSpec::straight(const std::vector<double>& target) {
  PathSpec p;
  p.waypoints.push_back(origin_like(target));
  p.waypoints.push_back(target);
  return p;
}

IntegrabilityResult check_integrability(const std::vector<Expr>& g,
                                        const std::vector<PhasePoint>& pts, double tol) {
  int d = static_cast<int>(g.size());
  for (int i = 0; i < d; ++i) {
    SymbolSet s = collect_symbols(g[i]);
    for (const auto& v : s.vars)
      if (v.kind == VarKind::Q)
        for (const auto& x : pts)
          if (std::abs(eval(diff(g[i], v), x)) > tol)
            throw SolveError("g_" + std::to_string(i + 1) + " depends on " + v.name());
  }
  IntegrabilityResult r;
  for (int i = 1; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j) {
      Expr curl = sub(diff(g[i - 1], {VarKind::P, j}), diff(g[j - 1], {VarKind::P, i}));
      for (const auto& x : pts) r.residual = std::max(r.residual, std::abs(eval(curl, x)));
    }
  r.ok = r.residual <= tol;
  return r;
}

namespace {

// Adaptive Simpson on [a, b] with absolute tolerance.
double simpson(const std::function<double(double)>& fn, double a, double b, double fa,
               double fb, double fm, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = fn(lm), frm = fn(rm);
  double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15.0;
  return simpson(fn, a, m, fa, fm, flm, tol / 2, depth - 1) +
         simpson(fn, m, b, fm, fb, frm, tol / 2, depth - 1);
}

double integrate_adaptive(const std::function<double(double)>& fn, double a, double b,
                          double tol) {
  if (a == b) return 0.0;
  double fa = fn(a), fb = fn(b), fm = fn(0.5 * (a + b));
  return simpson(fn, a, b, fa, fb, fm, tol, 48);
}

}  // namespace

double integrate_one_form(const std::vector<Expr>& g,
                          const std::map<std::string, double>& params, const PathSpec& path,
                          double tol) {
  if (path.waypoints.size() < 2) throw SolveError("path needs at least two waypoints");
  const int d = static_cast<int>(g.size());
  double total = 0.0;
  PhasePoint x;
  x.q.assign(d, 0.0);
  x.p.assign(d, 0.0);
  x.params = params;
  for (std::size_t s = 0; s + 1 < path.waypoints.size(); ++s) {
    const auto& from = path.waypoints[s];
    const auto& to = path.waypoints[s + 1];
    auto integrand = [&](double t) {
      double acc = 0.0;
      for (int i = 0; i < d; ++i) x.p[i] = from[i] + t * (to[i] - from[i]);
      for (int i = 0; i < d; ++i) {
        double dp = to[i] - from[i];
        if (dp != 0.0) acc += eval(g[i], x) * dp;
      }
      return acc;
    };
    total += integrate_adaptive(integrand, 0.0, 1.0, tol);
  }
  return total;
}

double solve_f_line_integral(const std::vector<Expr>& g,
                             const std::map<std::string, double>& params,
                             const PathSpec& path, double c) {
  return c + integrate_one_form(g, params, path);
}

double solve_f_line_integral(const std::vector<Expr>& g,
                             const std::map<std::string, double>& params,
                             const std::vector<double>& target, double c) {
  double one = integrate_one_form(g, params, PathSpec::axis_polyline(target));
  double two = integrate_one_form(g, params, PathSpec::axis_polyline_reversed(target));
  if (std::abs(one - two) > 1e-7)
    throw SolveError("path dependence detected: the 1-form is not closed (difference " +
                     std::to_string(one - two) + ")");
  return c + one;
}

// ---------------------------------------------------------------------------
// 2D polynomial family

Poly2D Poly2D::from_expr(const Expr& l, const std::vector<std::string>& extra_symbols) {
  std::vector<std::string> full = {"q1", "q2", "p1", "p2"};
  for (const auto& s : extra_symbols) full.push_back(s);
  auto poly = expand_polynomial(l, full);
  if (!poly) throw SolveError("l is not polynomial in q1, q2, p1, p2");

  std::vector<std::string> rest(full.begin() + 2, full.end());
  int nrest = static_cast<int>(rest.size());
  MultiPoly s(nrest), a(nrest), b(nrest);
  for (const auto& [m, c] : poly->terms()) {
    MultiPoly::Mono tail(m.begin() + 2, m.end());
    int dq1 = m[0], dq2 = m[1];
    if (dq1 + dq2 > 1)
      throw SolveError("l must be affine in the positions");
    if (dq1 == 1)
      a.add_term(tail, c);
    else if (dq2 == 1)
      b.add_term(tail, c);
    else
      s.add_term(tail, c);
  }
  return from_parts(std::move(s), std::move(a), std::move(b), std::move(rest));
}

Poly2D Poly2D::from_parts(MultiPoly s, MultiPoly a, MultiPoly b,
                          std::vector<std::string> symbols) {
  // closing condition on the q-coefficients: da/dp1 + db/dp2 = 0
  MultiPoly defect = a.derivative(0) + b.derivative(1);
  if (!defect.is_zero())
    throw SolveError("coefficient constraint violated: da/dp1 + db/dp2 = " +
                     defect.to_string(symbols));
  Poly2D out;
  out.s_ = std::move(s);
  out.a_ = std::move(a);
  out.b_ = std::move(b);
  out.symbols_ = std::move(symbols);
  return out;
}

Expr Poly2D::to_expr() const {
  Expr e = poly_to_expr(s_, symbols_);
  e = add(e, mul(poly_to_expr(a_, symbols_), qvar(1)));
  e = add(e, mul(poly_to_expr(b_, symbols_), qvar(2)));
  return simplify(e);
}

Expr solve_f_polynomial_2d(const Poly2D& l, const Rational& c) {
  // grad f = (b, -a); integrate b along p2 = 0, then -a upward in p2
  const MultiPoly& a = l.q1_coeff();
  const MultiPoly& b = l.q2_coeff();
  MultiPoly fb = b.at_zero(1).antiderivative(0);       // Int b(p1', 0) dp1'
  MultiPoly fa = a.antiderivative(1);                  // Int a(p1, p2') dp2'
  MultiPoly f = fb - fa + MultiPoly::constant(fb.nvars(), c);
  return simplify(poly_to_expr(f, l.symbols()));
}

// ---------------------------------------------------------------------------
// Radial direction

namespace {

double eval_rho(const Expr& e, double rho, const std::map<std::string, double>& params) {
  PhasePoint x;
  x.params = params;
  x.params["rho"] = rho;
  return eval(e, x);
}

}  // namespace

double RadialF::radicand(double rho) const {
  auto integrand = [&](double r) { return eval_rho(a, r, params) * r; };
  return c - 2.0 * integrate_adaptive(integrand, 0.0, rho, 1e-10);
}

double RadialF::operator()(double rho) const {
  double R = radicand(rho);
  if (R <= 0) {
    // locate where the radicand crosses zero to report the usable range
    double lo = 0, hi = rho;
    for (int it = 0; it < 64; ++it) {
      double mid = 0.5 * (lo + hi);
      (radicand(mid) > 0 ? lo : hi) = mid;
    }
    throw SolveError("radicand nonpositive at rho = " + std::to_string(rho) +
                     "; f degenerates near rho = " + std::to_string(hi));
  }
  return std::sqrt(R);
}

RadialF solve_f_radial(const Expr& a_of_rho, const Rational& c,
                       const std::map<std::string, double>& params) {
  RadialF out;
  out.a = a_of_rho;
  out.params = params;
  out.c = to_double(c);

  SymbolSet s = collect_symbols(a_of_rho);
  if (!s.vars.empty()) throw SolveError("a must be a function of rho alone");

  // polynomial a admits an exact radicand
  std::vector<std::string> symbols = {"rho"};
  for (const auto& p : s.params)
    if (p != "rho") symbols.push_back(p);
  if (auto ap = expand_polynomial(a_of_rho, symbols)) {
    MultiPoly arho = *ap * MultiPoly::variable(ap->nvars(), 0);
    MultiPoly radicand =
        MultiPoly::constant(ap->nvars(), c) - arho.antiderivative(0).scaled(2);
    out.closed_form = sqrt(poly_to_expr(radicand, symbols));
  }
  return out;
}

double RadialA::operator()(double rho) const {
  if (rho == 0.0) {
    double fp0 = eval_rho(fprime, 0.0, params);
    if (std::abs(fp0) > 1e-12)
      throw SolveError("a(0) unbounded: f'(0) = " + std::to_string(fp0));
    return -eval_rho(f, 0.0, params) * eval_rho(fsecond, 0.0, params);
  }
  return eval_rho(expr, rho, params);
}

RadialA solve_a_from_f(const Expr& f_of_rho, const std::map<std::string, double>& params) {
  SymbolSet s = collect_symbols(f_of_rho);
  if (!s.vars.empty()) throw SolveError("f must be a function of rho alone");

  RadialA out;
  out.f = f_of_rho;
  out.fprime = diff_param(f_of_rho, "rho");
  out.fsecond = diff_param(out.fprime, "rho");
  out.params = params;

  std::vector<std::string> symbols = {"rho"};
  for (const auto& p : s.params)
    if (p != "rho") symbols.push_back(p);
  if (auto fp = expand_polynomial(f_of_rho, symbols)) {
    MultiPoly prod = *fp * fp->derivative(0);  // f f'
    // divisible by rho exactly when no constant-in-rho term survives
    bool divisible = true;
    MultiPoly quot(prod.nvars());
    for (const auto& [m, c] : prod.terms()) {
      if (m[0] == 0) {
        divisible = false;
        break;
      }
      MultiPoly::Mono q = m;
      q[0] -= 1;
      quot.add_term(q, c);
    }
    if (!divisible)
      throw SolveError("f f'/rho unbounded at rho = 0: f has a linear term in rho");
    out.expr = simplify(poly_to_expr(-quot, symbols));
    out.exact_poly = true;
    return out;
  }

  out.expr = neg(div(mul(out.f, out.fprime), param("rho")));
  return out;
}

}  // namespace solver
}  // namespace gup
