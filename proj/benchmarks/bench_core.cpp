#include "gup/closure.hpp"
#include "gup/dynamics.hpp"
#include "gup/model.hpp"
#include "gup/opalg.hpp"

#include <benchmark/benchmark.h>

using namespace gup;

namespace {

GupModel kmm3d() {
  auto m = make_model(3, parse("1 + beta*(p1^2 + p2^2 + p3^2)"),
                      {parse("2*beta*(q2*p1 - q1*p2)"), parse("2*beta*(q3*p1 - q1*p3)"),
                       parse("2*beta*(q3*p2 - q2*p3)")},
                      {{"beta", 0.1}}, "kmm-3d");
  m.exact_params["beta"] = Rational(1, 10);
  return m;
}

void bm_expr_eval(benchmark::State& state) {
  Expr e = parse("(1 + beta*(p1^2 + p2^2 + p3^2))^2 + sqrt(1 + q1^2)*exp(p2/4)");
  PhasePoint x{{0.3, -0.2, 0.5}, {0.1, 0.4, -0.3}, {{"beta", 0.1}}};
  for (auto _ : state) benchmark::DoNotOptimize(eval(e, x));
}
BENCHMARK(bm_expr_eval);

void bm_expr_diff(benchmark::State& state) {
  Expr e = parse("(1 + beta*(p1^2 + p2^2 + p3^2))^2 * (q1*p2 - q2*p1)");
  for (auto _ : state) benchmark::DoNotOptimize(diff(e, {VarKind::P, 2}));
}
BENCHMARK(bm_expr_diff);

void bm_bracket(benchmark::State& state) {
  auto m = kmm3d();
  Expr a = parse("q1*p2");
  Expr b = parse("p1^2 + q3");
  PhasePoint x = with_params(m, {{0.3, -0.2, 0.5}, {0.1, 0.4, -0.3}, {}});
  for (auto _ : state) benchmark::DoNotOptimize(bracket(m, a, b, x));
}
BENCHMARK(bm_bracket);

void bm_jacobi_residual(benchmark::State& state) {
  auto m = kmm3d();
  auto pts = sample_box(m, 32, 99);
  for (auto _ : state) benchmark::DoNotOptimize(closure::jacobi_residual(m, pts));
}
BENCHMARK(bm_jacobi_residual);

void bm_normalize_word(benchmark::State& state) {
  auto qm = opalg::quantum_model(kmm3d(), opalg::Ordering::MomentaLeft);
  // q3 p1 q2 q1 p3: five letters, every contraction fires
  auto w = opalg::product(
      opalg::product(opalg::product(opalg::q_op(3, 3), opalg::p_op(3, 1)),
                     opalg::product(opalg::q_op(3, 2), opalg::q_op(3, 1))),
      opalg::p_op(3, 3));
  for (auto _ : state) benchmark::DoNotOptimize(opalg::normalize(qm, w));
}
BENCHMARK(bm_normalize_word);

void bm_operator_jacobi(benchmark::State& state) {
  auto qm = opalg::quantum_model(kmm3d(), opalg::Ordering::MomentaLeft);
  for (auto _ : state) benchmark::DoNotOptimize(opalg::quantum_jacobi_residual(qm, 0, 1, 2));
}
BENCHMARK(bm_operator_jacobi);

void bm_rk4_steps(benchmark::State& state) {
  auto m = kmm3d();
  Expr H = parse("(p1^2 + p2^2 + p3^2 + q1^2 + q2^2 + q3^2)/2");
  PhasePoint x0{{0.4, 0.0, 0.2}, {0.0, 0.3, -0.1}, {}};
  dynamics::IntegrateOptions opts;
  for (auto _ : state)
    benchmark::DoNotOptimize(dynamics::integrate(m, H, x0, 0.1, opts));  // 100 steps
}
BENCHMARK(bm_rk4_steps);

}  // namespace

BENCHMARK_MAIN();
