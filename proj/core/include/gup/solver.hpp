#pragma once

#include "gup/expr.hpp"
#include "gup/poly.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gup {
namespace solver {

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Piecewise-linear integration path in momentum space, starting at the
// origin. The axis polyline fills one coordinate at a time; the reversed
// variant fills them in the opposite order, which gives an independent route
// for path-independence checks.
struct PathSpec {
  std::vector<std::vector<double>> waypoints;

  static PathSpec axis_polyline(const std::vector<double>& target);
  static PathSpec axis_polyline_reversed(const std::vector<double>& target);
  static PathSpec straight(const std::vector<double>& target);
};

struct IntegrabilityResult {
  bool ok = false;
  double residual = 0.0;  // max curl component over the sample
};

// g must be momentum-only; a q-dependence throws SolveError.
IntegrabilityResult check_integrability(const std::vector<Expr>& g,
                                        const std::vector<PhasePoint>& pts,
                                        double tol = 1e-10);

// Line integral of the 1-form sum_i g_i dp_i along the path, adaptive Simpson
// with the given absolute tolerance per segment.
double integrate_one_form(const std::vector<Expr>& g,
                          const std::map<std::string, double>& params,
                          const PathSpec& path, double tol = 1e-10);

// f(target) = c + integral of g dp from the origin. The default overload
// integrates along two different polylines and reports path dependence above
// 1e-7 as an error; the PathSpec overload takes the caller's route verbatim.
double solve_f_line_integral(const std::vector<Expr>& g,
                             const std::map<std::string, double>& params,
                             const std::vector<double>& target, double c);
double solve_f_line_integral(const std::vector<Expr>& g,
                             const std::map<std::string, double>& params,
                             const PathSpec& path, double c);

// Generating function l = s(p) + a(p) q1 + b(p) q2 for one position pair,
// all three parts polynomial. Coefficients live in the polynomial ring over
// (p1, p2) extended by any parameter symbols, so families like kappa stay
// symbolic. Construction enforces the coefficient constraint
// da/dp1 + db/dp2 = 0; violations throw SolveError.
class Poly2D {
 public:
  static Poly2D from_expr(const Expr& l, const std::vector<std::string>& extra_symbols = {});
  static Poly2D from_parts(MultiPoly s, MultiPoly a, MultiPoly b,
                           std::vector<std::string> symbols);

  const MultiPoly& s_part() const { return s_; }
  const MultiPoly& q1_coeff() const { return a_; }
  const MultiPoly& q2_coeff() const { return b_; }
  const std::vector<std::string>& symbols() const { return symbols_; }
  Expr to_expr() const;

 private:
  Poly2D() = default;
  MultiPoly s_, a_, b_;
  std::vector<std::string> symbols_;  // "p1", "p2", parameters...
};

// Closed-form f for the 2D polynomial family, integration constant c at the
// origin. Exact rational (or parameter-polynomial) coefficients throughout.
Expr solve_f_polynomial_2d(const Poly2D& l, const Rational& c = 1);

// Radial deformation in 3 dimensions: f(rho) = sqrt(c - 2 Int_0^rho a(r) r dr).
// closed_form is present when a is polynomial in rho; the numeric evaluator
// works either way. A nonpositive radicand throws SolveError naming the
// critical radius.
struct RadialF {
  Expr a;
  std::map<std::string, double> params;
  double c = 1.0;
  std::optional<Expr> closed_form;

  double operator()(double rho) const;
  double radicand(double rho) const;
};
RadialF solve_f_radial(const Expr& a_of_rho, const Rational& c,
                       const std::map<std::string, double>& params = {});

// Inverse direction: a(rho) = -f f' / rho. Polynomial f yields an exact
// polynomial a; otherwise the returned expression keeps the quotient form and
// the evaluator patches rho = 0 with the limit -f(0) f''(0), which requires
// f'(0) = 0.
struct RadialA {
  Expr expr;
  bool exact_poly = false;
  Expr f, fprime, fsecond;
  std::map<std::string, double> params;

  double operator()(double rho) const;
};
RadialA solve_a_from_f(const Expr& f_of_rho, const std::map<std::string, double>& params = {});

}  // namespace solver
}  // namespace gup
