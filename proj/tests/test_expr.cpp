#include "gup/expr.hpp"
#include "gup/poly.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gup;

namespace {

PhasePoint pt(std::vector<double> q, std::vector<double> p,
              std::map<std::string, double> params = {}) {
  PhasePoint x;
  x.q = std::move(q);
  x.p = std::move(p);
  x.params = std::move(params);
  return x;
}

// random expression over q1, p1, p2 and one parameter, depth-bounded; the
// leaves are kept away from values where sqrt or division could blow up
Expr random_expr(std::mt19937_64& rng, int depth) {
  auto pick = [&](int n) { return static_cast<int>(rng() % n); };
  if (depth == 0) {
    switch (pick(5)) {
      case 0: return qvar(1);
      case 1: return pvar(1);
      case 2: return pvar(2);
      case 3: return param("mu");
      default: return constant(Rational(pick(19) - 9, 1 + pick(7)));
    }
  }
  Expr a = random_expr(rng, depth - 1);
  Expr b = random_expr(rng, depth - 1);
  switch (pick(8)) {
    case 0: return add(a, b);
    case 1: return sub(a, b);
    case 2: return mul(a, b);
    case 3: return neg(a);
    case 4: return pow(a, pick(3) + 1);
    case 5: return sqrt(add(constant(1), mul(a, a)));  // argument >= 1
    case 6: return div(a, add(constant(3), mul(b, b)));  // denominator >= 3
    default: return exp(div(a, add(constant(20), mul(a, a))));  // bounded argument
  }
}

double fd(const Expr& e, const PhasePoint& x, VarRef v, double h = 1e-6) {
  PhasePoint lo = x, hi = x;
  auto& vlo = v.kind == VarKind::Q ? lo.q[v.index - 1] : lo.p[v.index - 1];
  auto& vhi = v.kind == VarKind::Q ? hi.q[v.index - 1] : hi.p[v.index - 1];
  vlo -= h;
  vhi += h;
  return (eval(e, hi) - eval(e, lo)) / (2 * h);
}

}  // namespace

TEST_CASE("parsing: precedence and associativity") {
  auto x = pt({2}, {3, 5});
  CHECK(eval(parse("1 + 2*3"), x) == doctest::Approx(7));
  CHECK(eval(parse("2*p1^2"), x) == doctest::Approx(18));
  CHECK(eval(parse("-p1^2"), x) == doctest::Approx(-9));       // exponent binds first
  CHECK(eval(parse("(1 + 2)*3"), x) == doctest::Approx(9));
  CHECK(eval(parse("8 - 3 - 2"), x) == doctest::Approx(3));    // left associative
  CHECK(eval(parse("12 / 3 / 2"), x) == doctest::Approx(2));
  CHECK(eval(parse("2 - -3"), x) == doctest::Approx(5));
  CHECK(eval(parse("p1^-2"), x) == doctest::Approx(1.0 / 9));
  CHECK(eval(parse("sqrt(p1^2 + 16)"), x) == doctest::Approx(5));
  CHECK(eval(parse("exp(0)"), x) == doctest::Approx(1));
}

TEST_CASE("parsing: decimal literals are exact") {
  Expr e = parse("0.125");
  REQUIRE(e->kind == ExprKind::Const);
  CHECK(e->value == Rational(1, 8));
  // 0.1 is exactly 1/10, not the nearest double
  CHECK(parse("0.1")->value == Rational(1, 10));
}

TEST_CASE("parsing: rejects malformed input") {
  CHECK_THROWS_AS(parse("1 +"), ParseError);
  CHECK_THROWS_AS(parse("q0"), ParseError);        // coordinates are 1-based
  CHECK_THROWS_AS(parse("p1^q1"), ParseError);     // integer exponents only
  CHECK_THROWS_AS(parse("sin(p1)"), ParseError);   // unknown function
  CHECK_THROWS_AS(parse("(1 + 2"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("1 2"), ParseError);
  try {
    parse("1 + %");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
  }
}

TEST_CASE("print/parse round trip preserves value") {
  std::mt19937_64 rng(20240817);
  auto x = pt({0.7}, {0.3, -0.4}, {{"mu", 1.3}});
  for (int i = 0; i < 200; ++i) {
    Expr e = random_expr(rng, 4);
    double want = eval(e, x);
    Expr back = parse(to_string(e));
    CHECK(eval(back, x) == doctest::Approx(want).epsilon(1e-12));
    // and printing is stable once round-tripped
    CHECK(to_string(back) == to_string(parse(to_string(back))));
  }
}

TEST_CASE("evaluation failures are reported") {
  auto x = pt({1}, {1});
  CHECK_THROWS_AS(eval(parse("nu"), x), EvalError);       // unbound parameter
  CHECK_THROWS_AS(eval(parse("q2"), x), EvalError);       // out of dimension
  CHECK_THROWS_AS(eval(parse("sqrt(0 - p1)"), x), EvalError);
  CHECK_THROWS_AS(eval(parse("1/(p1 - 1)"), x), EvalError);
}

TEST_CASE("derivatives match finite differences") {
  auto x = pt({0.7}, {0.4, -0.3}, {{"mu", 2.0}});
  for (const char* s : {"p1^3 + 2*p1*p2", "sqrt(1 + p1^2 + p2^2)", "exp(p1/5)*q1",
                        "(q1 + p2)/(2 + p1^2)", "mu*p1^2 - p2^-1", "-sqrt(4 + q1^2)*p2"}) {
    Expr e = parse(s);
    for (VarRef v : {VarRef{VarKind::P, 1}, VarRef{VarKind::P, 2}, VarRef{VarKind::Q, 1}}) {
      CAPTURE(s);
      CAPTURE(v.name());
      CHECK(eval(diff(e, v), x) == doctest::Approx(fd(e, x, v)).epsilon(1e-6));
    }
  }
}

TEST_CASE("derivatives: random expressions against finite differences") {
  std::mt19937_64 rng(99);
  auto x = pt({0.5}, {0.25, -0.4}, {{"mu", 0.8}});
  VarRef v{VarKind::P, 1};
  for (int i = 0; i < 60; ++i) {
    Expr e = random_expr(rng, 3);
    double analytic = eval(diff(e, v), x);
    double numeric = fd(e, x, v);
    CHECK(std::abs(analytic - numeric) <=
          1e-5 * std::max({1.0, std::abs(analytic), std::abs(numeric)}));
  }
}

TEST_CASE("diff_param") {
  auto x = pt({0}, {0.3}, {{"mu", 0.7}});
  Expr e = parse("mu^2*p1 + mu");
  CHECK(eval(diff_param(e, "mu"), x) == doctest::Approx(2 * 0.7 * 0.3 + 1));
  CHECK(structural_equal(diff_param(parse("p1"), "mu"), constant(0)));
}

TEST_CASE("substitute replaces surface names") {
  Expr e = parse("beta*(p1^2 + p2^2)");
  Expr s = substitute(e, {{"beta", constant(Rational(1, 10))}, {"p2", constant(0)}});
  auto x = pt({}, {0.5, 99});  // p2 must no longer be read
  CHECK(eval(s, x) == doctest::Approx(0.025));
  // untouched trees are shared, not copied
  Expr f = parse("p1 + p2");
  CHECK(substitute(f, {{"q7", constant(1)}}) == f);
}

TEST_CASE("simplify preserves value and reaches fixpoints") {
  std::mt19937_64 rng(4242);
  auto x = pt({0.9}, {0.2, 0.6}, {{"mu", -0.7}});
  for (int i = 0; i < 200; ++i) {
    Expr e = random_expr(rng, 4);
    Expr s = simplify(e);
    CHECK(eval(s, x) == doctest::Approx(eval(e, x)).epsilon(1e-12));
    CHECK(structural_equal(simplify(s), s));
  }
}

TEST_CASE("simplify folds the easy identities") {
  CHECK(structural_equal(simplify(parse("p1 + 0")), pvar(1)));
  CHECK(structural_equal(simplify(parse("1*p1")), pvar(1)));
  CHECK(structural_equal(simplify(parse("0*q1")), constant(0)));
  CHECK(structural_equal(simplify(parse("1/3 + 1/6")), constant(Rational(1, 2))));
  CHECK(structural_equal(simplify(parse("p1^1")), pvar(1)));
  // sign propagation through products
  CHECK(to_string(simplify(parse("-(2*beta*(0 - p2))"))) == "2*beta*p2");
}

TEST_CASE("collect_symbols") {
  auto s = collect_symbols(parse("beta*q1 + sqrt(1 + p2^2)"));
  CHECK(s.params == std::set<std::string>{"beta"});
  CHECK(s.vars.count(VarRef{VarKind::Q, 1}) == 1);
  CHECK(s.vars.count(VarRef{VarKind::P, 2}) == 1);
  CHECK(s.vars.size() == 2);
}

TEST_CASE("rational_equal decides algebraic identity of rational functions") {
  CHECK(rational_equal(parse("(p1^2 - 1)/(p1 + 1)"), parse("p1 - 1"), {"p1"}));
  CHECK(rational_equal(parse("-2*beta*(q1*p2 - q2*p1)"), parse("2*beta*(q2*p1 - q1*p2)"),
                       {"q1", "q2", "p1", "p2", "beta"}));
  CHECK_FALSE(rational_equal(parse("p1 + 1"), parse("p1"), {"p1"}));
}
