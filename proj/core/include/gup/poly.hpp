#pragma once

#include "gup/expr.hpp"
#include "gup/rational.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gup {

// Sparse multivariate polynomial over Rational. The variable set is
// positional; callers keep the matching name list when one is needed for
// printing or conversion back to expressions.
class MultiPoly {
 public:
  using Mono = std::vector<int>;  // one exponent per variable

  MultiPoly() = default;
  explicit MultiPoly(int nvars) : nvars_(nvars) {}

  static MultiPoly constant(int nvars, Rational c);
  static MultiPoly variable(int nvars, int i);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Mono, Rational>& terms() const { return terms_; }

  // coefficient access; missing monomials read as zero
  Rational coeff(const Mono& m) const;
  void set(const Mono& m, Rational c);
  void add_term(const Mono& m, const Rational& c);

  MultiPoly operator-() const;
  MultiPoly operator+(const MultiPoly& o) const;
  MultiPoly operator-(const MultiPoly& o) const;
  MultiPoly operator*(const MultiPoly& o) const;
  MultiPoly scaled(const Rational& c) const;
  MultiPoly pow(int n) const;  // n >= 0
  bool operator==(const MultiPoly& o) const;

  MultiPoly derivative(int i) const;
  MultiPoly antiderivative(int i) const;
  // substitute variable i := 0
  MultiPoly at_zero(int i) const;
  int degree_in(int i) const;

  double eval(const std::vector<double>& x) const;
  Rational eval_exact(const std::vector<Rational>& x) const;

  std::string to_string(const std::vector<std::string>& names) const;

 private:
  int nvars_ = 0;
  std::map<Mono, Rational> terms_;
};

// Expands an expression into a polynomial over the named symbols (coordinate
// names like "p1" or parameter names). Returns nullopt when the expression is
// not polynomial in those symbols: sqrt/exp nodes, negative powers, division
// by anything non-constant, or a symbol not in the list.
std::optional<MultiPoly> expand_polynomial(const Expr& e,
                                           const std::vector<std::string>& symbols);

// Expansion into a ratio of polynomials; division and negative integer powers
// are allowed, sqrt/exp still are not. den is never the zero polynomial.
struct RationalForm {
  MultiPoly num, den;
};
std::optional<RationalForm> expand_rational(const Expr& e,
                                            const std::vector<std::string>& symbols);

// Equality test of two expressions as rational functions of the given
// symbols (cross-multiplied exact polynomial comparison).
bool rational_equal(const Expr& a, const Expr& b, const std::vector<std::string>& symbols);

Expr poly_to_expr(const MultiPoly& p, const std::vector<std::string>& symbols);

}  // namespace gup
