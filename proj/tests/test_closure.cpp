#include "gup/closure.hpp"

#include "corpus.hpp"
#include "gup/poly.hpp"

#include <doctest.h>

#include <algorithm>

using namespace gup;
using namespace gup::closure;

namespace {

const CheckItem* find_item(const CheckReport& rep, const std::string& name) {
  for (const auto& it : rep.items)
    if (it.name == name) return &it;
  return nullptr;
}

}  // namespace

TEST_CASE("decomposition of the quadratic model") {
  auto dec = decompose_L(corpus::kmm_2d());
  REQUIRE(dec.exact);
  REQUIRE(dec.conforming);
  std::vector<std::string> syms = {"q1", "q2", "p1", "p2", "beta"};
  CHECK(rational_equal(dec.g[0], parse("2*beta*p1"), syms));
  CHECK(rational_equal(dec.g[1], parse("2*beta*p2"), syms));
  CHECK(rational_equal(dec.S[0], parse("0"), syms));
  // signed access flips across the diagonal
  CHECK(rational_equal(dec.S_at(2, 1, 2), parse("0"), syms));
}

TEST_CASE("decomposition keeps the q-free part") {
  auto m = corpus::kmm_3d_strange();
  auto dec = decompose_L(m);
  REQUIRE(dec.conforming);
  std::vector<std::string> syms = {"p1", "p2", "p3", "beta"};
  for (int k = 0; k < 3; ++k)
    CHECK(rational_equal(dec.S[k], parse("(1 + beta*(p1^2 + p2^2 + p3^2))^2"), syms));
}

TEST_CASE("a conforming decomposition is not yet a closing model") {
  // L_12 = q1 is affine with a constant, curl-free q-coefficient vector, but
  // no f with gradient (0, -1) is compatible with f = 1
  auto m = make_model(2, parse("1"), {parse("q1")});
  auto dec = decompose_L(m);
  CHECK(dec.exact);
  CHECK(dec.conforming);
  CHECK(rational_equal(dec.g[0], parse("0"), {"p1", "p2"}));
  CHECK(rational_equal(dec.g[1], parse("-1"), {"p1", "p2"}));
  auto cc = closure_check(m, m.domain, 80, 7);
  CHECK(!cc.pass);
  auto* grad = find_item(cc.report, "momentum-gradient");
  REQUIRE(grad != nullptr);
  CHECK(!grad->pass);
}

TEST_CASE("rotational q-coefficients are rejected") {
  auto dec = decompose_L(make_model(2, parse("1"), {parse("p1*q1")}));
  CHECK(dec.exact);
  CHECK(!dec.conforming);
  CHECK(dec.reason.find("not a gradient") != std::string::npos);
}

TEST_CASE("non-affine L is flagged as such") {
  auto dec = decompose_L(make_model(2, parse("1"), {parse("q1^2")}));
  CHECK(!dec.exact);
  CHECK(!dec.conforming);
  CHECK(dec.reason.find("affine") != std::string::npos);
}

TEST_CASE("inconsistent pairs are flagged") {
  auto entries = corpus::corrupted();
  auto it = std::find_if(entries.begin(), entries.end(),
                         [](const corpus::Entry& e) { return e.name == "kmm-3d-pair-scaled"; });
  REQUIRE(it != entries.end());
  auto dec = decompose_L(it->model);
  CHECK(!dec.conforming);
  CHECK(dec.reason.find("inconsistent g_") != std::string::npos);
}

TEST_CASE("residual families on the quadratic 3D model") {
  auto m = corpus::kmm_3d();
  auto pts = sample_box(m, 60, 99);
  CHECK(q_independence_residual(m, pts) == 0.0);
  CHECK(gradient_residual(m, pts) <= 1e-12);
  auto sr = strange_residual(m, pts);
  CHECK(sr.full <= 1e-12);
  CHECK(sr.s_only <= 1e-12);
  CHECK(jacobi_residual(m, pts) <= 1e-12);
}

TEST_CASE("the q-free part may sit anywhere in the solution family") {
  auto m = corpus::kmm_3d_strange();
  auto pts = sample_box(m, 60, 99);
  auto sr = strange_residual(m, pts);
  CHECK(sr.full <= 1e-12);
  CHECK(sr.s_only <= 1e-12);
  CHECK(jacobi_residual(m, pts) <= 1e-12);
}

TEST_CASE("a constant q-free part on one pair violates the cyclic constraint") {
  auto entries = corpus::corrupted();
  auto it = std::find_if(entries.begin(), entries.end(), [](const corpus::Entry& e) {
    return e.name == "kmm-3d-strange-const";
  });
  REQUIRE(it != entries.end());
  auto pts = sample_box(it->model, 60, 99);
  auto sr = strange_residual(it->model, pts);
  CHECK(sr.full >= 1e-3);
  CHECK(sr.s_only >= 1e-3);

  // the violation shows up verbatim as the Jacobi defect of the (q1,q2,q3)
  // triple: substitute the parameter and compare symbolically
  Expr defect = substitute(jacobi_triple_expr(it->model, 0, 1, 2),
                           {{"beta", constant(Rational(1, 10))}});
  std::vector<std::string> syms = {"q1", "q2", "q3", "p1", "p2", "p3"};
  CHECK(rational_equal(defect, parse("-(2/5)*p3"), syms));
}

TEST_CASE("closure and the Jacobi identity agree across the corpus") {
  for (const auto& entry : corpus::conforming()) {
    CAPTURE(entry.name);
    auto cc = closure_check(entry.model, entry.model.domain, 100, 12345);
    CHECK(cc.pass);
    auto pts = sample_box(entry.model, 100, 12345);
    CHECK(jacobi_residual(entry.model, pts) <= 1e-9);
  }
  for (const auto& entry : corpus::corrupted()) {
    CAPTURE(entry.name);
    auto cc = closure_check(entry.model, entry.model.domain, 100, 12345);
    CHECK(!cc.pass);
    auto pts = sample_box(entry.model, 100, 12345);
    CHECK(jacobi_residual(entry.model, pts) > 1e-9);
  }
}

TEST_CASE("corrupted models fail the expected family") {
  for (const auto& entry : corpus::corrupted()) {
    CAPTURE(entry.name);
    auto cc = closure_check(entry.model, entry.model.domain, 100, 12345);
    auto* item = find_item(cc.report, entry.expected_failure);
    REQUIRE_MESSAGE(item != nullptr, entry.expected_failure);
    CHECK(!item->pass);
  }
}

TEST_CASE("one degree of freedom closes unconditionally") {
  auto m = make_model(1, parse("1 + alpha*p1 + alpha*q1^2"), {}, {{"alpha", 0.2}});
  // even a q-dependent f: every 2-form on a 2-dimensional manifold is closed
  auto cc = closure_check(m, m.domain, 50, 3);
  CHECK(cc.pass);
  auto pts = sample_box(m, 50, 3);
  CHECK(jacobi_residual(m, pts) == 0.0);
}

TEST_CASE("jacobi triples involving two momenta vanish identically") {
  auto m = corpus::kmm_2d();
  auto pts = sample_box(m, 30, 21);
  // (q1, p1, p2) and (q2, p1, p2): the momentum sector is abelian
  for (int a : {0, 1}) {
    Expr t = jacobi_triple_expr(m, a, 2, 3);
    for (const auto& x0 : pts) {
      PhasePoint x = with_params(m, x0);
      CHECK(std::abs(eval(t, x)) <= 1e-12);
    }
  }
}
