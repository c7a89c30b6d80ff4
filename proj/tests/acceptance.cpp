// End-to-end acceptance run. Each numbered criterion prints one PASS/FAIL
// line with the measured numbers; the process exit code is the number of
// failed criteria. Tolerances are pinned here on purpose: loosening them is a
// visible diff, not a test-framework knob.

#include "corpus.hpp"

#include "gup/angular.hpp"
#include "gup/closure.hpp"
#include "gup/dynamics.hpp"
#include "gup/model_io.hpp"
#include "gup/opalg.hpp"
#include "gup/solver.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace gup;

namespace {

int g_failures = 0;

void report(int idx, const std::string& label, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s  (%s)\n", ok ? "PASS" : "FAIL", idx, label.c_str(), detail.c_str());
  if (!ok) ++g_failures;
}

void guarded(int idx, const std::string& label, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(idx, label, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const corpus::Entry& find_entry(const std::vector<corpus::Entry>& v, const std::string& name) {
  for (const auto& e : v)
    if (e.name == name) return e;
  throw std::runtime_error("corpus entry missing: " + name);
}

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_tool(const std::string& args) {
  RunResult r;
  std::string cmd = std::string("env -u GUP_SEED ") + GUP_TOOL_PATH + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// 1: reconstruct the planar deformation factor from the generating function
//    l = kappa (q1 p2 - q2 p1) by line integration of its q-coefficients.
void criterion_1() {
  const std::string label = "planar f reconstructed from the generating function";
  Expr l = parse("kappa*(q1*p2 - q2*p1)");
  std::map<std::string, double> params{{"kappa", 0.3}};
  std::vector<Expr> g = {diff(l, {VarKind::Q, 2}), neg(diff(l, {VarKind::Q, 1}))};

  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    double r = 0.5 * (k + 1) / 50.0;
    double th = 0.7 * k;
    std::vector<double> target{r * std::cos(th), r * std::sin(th)};
    double f = solver::solve_f_line_integral(g, params, target, 1.0);
    double expected = 1.0 - 0.15 * r * r;
    worst = std::max(worst, std::abs(f - expected));
  }
  report(1, label, worst <= 1e-8, "max |f - (1 - (kappa/2) rho^2)| = " + fmt(worst) +
                                      " over 50 targets, tol 1e-8");
}

// 2: invert the quadratic radial profile to its bracket coefficient and check
//    the brackets it induces.
void criterion_2() {
  const std::string label = "a recovered from the quadratic profile, brackets induced";
  auto ra = solver::solve_a_from_f(parse("1 + beta*rho^2"), {{"beta", 0.1}});
  bool symbolic = ra.exact_poly &&
                  rational_equal(ra.expr, parse("-2*beta*(1 + beta*rho^2)"), {"rho", "beta"});

  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    double rho = 0.05 * (k + 1);
    double expected = -0.2 * (1 + 0.1 * rho * rho);
    worst = std::max(worst, std::abs(ra(rho) - expected));
  }

  auto sch = angular::build_scheme(ra.expr, parse("1 + beta*rho^2"), {{"beta", 0.1}});
  std::vector<std::string> syms{"q1", "q2", "q3", "p1", "p2", "p3", "beta"};
  bool induced = rational_equal(sch.model.L_at(1, 2), parse("2*beta*(q2*p1 - q1*p2)"), syms) &&
                 rational_equal(sch.model.L_at(1, 3), parse("2*beta*(q3*p1 - q1*p3)"), syms) &&
                 rational_equal(sch.model.L_at(2, 3), parse("2*beta*(q3*p2 - q2*p3)"), syms);

  report(2, label, symbolic && induced && worst <= 1e-12,
         std::string("symbolic ") + (symbolic ? "ok" : "MISMATCH") + ", induced brackets " +
             (induced ? "ok" : "MISMATCH") + ", numeric residual " + fmt(worst) + ", tol 1e-12");
}

// 3: the constant-coefficient quadrature gives the square-root profile.
void criterion_3() {
  const std::string label = "radial quadrature reproduces sqrt(1 + alpha rho^2)";
  double worst = 0.0;
  for (double alpha : {0.1, 1.0}) {
    auto rf = solver::solve_f_radial(parse("-alpha"), 1, {{"alpha", alpha}});
    for (int k = 0; k < 20; ++k) {
      double rho = 0.1 * (k + 1);
      worst = std::max(worst, std::abs(rf(rho) - std::sqrt(1 + alpha * rho * rho)));
    }
  }
  report(3, label, worst <= 1e-8,
         "max deviation " + fmt(worst) + " over alpha in {0.1, 1}, 20 radii each, tol 1e-8");
}

// 4: the closure verdict and the measured Jacobi defect must agree on every
//    corpus entry, at the same seeded sample.
void criterion_4() {
  const std::string label = "closure verdict matches the jacobi defect corpus-wide";
  int agree = 0, total = 0;
  std::string mismatch;
  auto visit = [&](const corpus::Entry& e, bool expect_pass) {
    ++total;
    auto cc = closure::closure_check(e.model, e.model.domain, 100, 12345);
    auto pts = sample_box(e.model, 100, 12345);
    double jr = closure::jacobi_residual(e.model, pts);
    bool jacobi_ok = jr <= 1e-9;
    if (cc.pass == jacobi_ok && cc.pass == expect_pass)
      ++agree;
    else if (mismatch.empty())
      mismatch = e.name + " (check " + (cc.pass ? "pass" : "fail") + ", jacobi " + fmt(jr) + ")";
  };
  auto conf = corpus::conforming();
  auto corr = corpus::corrupted();
  for (const auto& e : conf) visit(e, true);
  for (const auto& e : corr) visit(e, false);
  bool sized = conf.size() >= 10 && corr.size() >= 10;
  std::ostringstream os;
  os << agree << "/" << total << " entries agree (" << conf.size() << " conforming, "
     << corr.size() << " corrupted)";
  if (!mismatch.empty()) os << ", first mismatch: " << mismatch;
  report(4, label, sized && agree == total, os.str());
}

// 5: the strange family accepts S = 0 and S = f^2 and rejects a constant S.
void criterion_5() {
  const std::string label = "strange family separates admissible from inadmissible S";
  auto m0 = corpus::kmm_3d();
  auto m2 = corpus::kmm_3d_strange();
  auto corr = corpus::corrupted();
  const auto& mc = find_entry(corr, "kmm-3d-strange-const").model;

  auto r0 = closure::strange_residual(m0, sample_box(m0, 100, 2025));
  auto r2 = closure::strange_residual(m2, sample_box(m2, 100, 2025));
  auto rc = closure::strange_residual(mc, sample_box(mc, 100, 2025));

  bool ok = r0.full <= 1e-12 && r0.s_only <= 1e-12 && r2.full <= 1e-12 && r2.s_only <= 1e-12 &&
            rc.full >= 1e-3 && rc.s_only >= 1e-3;
  report(5, label, ok,
         "S=0: " + fmt(std::max(r0.full, r0.s_only)) + ", S=f^2: " +
             fmt(std::max(r2.full, r2.s_only)) + " (tol 1e-12); S=1: " +
             fmt(std::min(rc.full, rc.s_only)) + " (must exceed 1e-3)");
}

// 6: angular families close for both radial schemes, the generators stay
//    transverse to p, and a constant shift visibly breaks the J-J family.
void criterion_6() {
  const std::string label = "angular families, transversality, shifted-scheme breakage";
  double family_worst = 0.0, pj_worst = 0.0;
  auto probe = [&](const angular::AngularScheme& sch) {
    auto pts = sample_box(sch.model, 200, 31415);
    auto rep = angular::check_angular_algebra(sch, pts, 1e-9);
    family_worst = std::max({family_worst, rep.q_family, rep.p_family, rep.jj_family});
    for (const auto& x : pts) pj_worst = std::max(pj_worst, std::abs(angular::p_dot_J(sch, x)));
  };
  probe(angular::build_scheme(parse("-1"), parse("sqrt(1 + rho^2)")));
  probe(angular::build_scheme(parse("-2*beta*(1 + beta*rho^2)"), parse("1 + beta*rho^2"),
                              {{"beta", 0.1}}));

  std::array<Expr, 3> s{constant(1), constant(0), constant(0)};
  auto shifted = angular::build_scheme(parse("-1"), parse("sqrt(1 + rho^2)"), {}, &s);
  auto rep_s = angular::check_angular_algebra(shifted, sample_box(shifted.model, 200, 31415), 1e-9);

  bool ok = family_worst <= 1e-9 && pj_worst <= 1e-12 && !rep_s.pass && rep_s.jj_family > 1e-3;
  report(6, label, ok,
         "families " + fmt(family_worst) + " (tol 1e-9), p.J " + fmt(pj_worst) +
             " (tol 1e-12), shifted J-J defect " + fmt(rep_s.jj_family) + " (must exceed 1e-3)");
}

// 7: the operator Jacobi identity vanishes exactly for the cubic model under
//    both orderings; for the constant-S corruption the leading grade equals
//    the classical defect.
void criterion_7() {
  const std::string label = "operator jacobi identity and its leading grade";
  auto km = corpus::kmm_3d();
  bool all_zero = true;
  for (auto ord : {opalg::Ordering::MomentaLeft, opalg::Ordering::MomentaRight}) {
    auto qm = opalg::quantum_model(km, ord);
    for (int a = 0; a < 6; ++a)
      for (int b = a + 1; b < 6; ++b)
        for (int c = b + 1; c < 6; ++c)
          all_zero = all_zero && opalg::quantum_jacobi_residual(qm, a, b, c).is_zero();
  }

  auto corr = corpus::corrupted();
  const auto& mc = find_entry(corr, "kmm-3d-strange-const").model;
  std::vector<std::string> vars{"q1", "q2", "q3", "p1", "p2", "p3"};
  Expr classical = substitute(closure::jacobi_triple_expr(mc, 0, 1, 2),
                              {{"beta", constant(Rational(1, 10))}});
  auto cp = expand_polynomial(classical, vars);
  bool grade_ok = cp.has_value();
  for (auto ord : {opalg::Ordering::MomentaLeft, opalg::Ordering::MomentaRight}) {
    auto qmc = opalg::quantum_model(mc, ord);
    auto r = opalg::quantum_jacobi_residual(qmc, 0, 1, 2);
    grade_ok = grade_ok && !r.is_zero() && r.min_hbar() == 1 &&
               r.grade_as_classical(1) == *cp && (r - r.graded_part(1)).is_zero();
  }

  report(7, label, all_zero && grade_ok,
         std::string("20 triples x 2 orderings ") + (all_zero ? "all zero" : "NONZERO") +
             "; corrupted leading grade " + (grade_ok ? "matches" : "DIFFERS from") +
             " the classical defect");
}

// 8: conservation under the fixed-step integrator, the invariant density, and
//    first-order trajectory response to the deformation strength.
void criterion_8() {
  const std::string label = "integrator conservation, invariant density, deformation scaling";
  dynamics::IntegrateOptions opts;  // rk4, dt = 1e-3

  auto km = corpus::kmm_3d();
  Expr H_free = parse("(p1^2 + p2^2 + p3^2)/2");
  PhasePoint x0_3{{0.0, 0.0, 0.0}, {0.3, -0.2, 0.1}, {}};
  auto tr = dynamics::integrate(km, H_free, x0_3, 10.0, opts);
  double e_drift = dynamics::conservation_report(tr, km, H_free).energy_drift;

  auto sch = angular::build_scheme(parse("-2*beta*(1 + beta*rho^2)"), parse("1 + beta*rho^2"),
                                   {{"beta", 0.1}});
  Expr H_rot = parse("(p1^2 + p2^2 + p3^2 + q1^2 + q2^2 + q3^2)/2");
  PhasePoint x0_rot{{0.4, 0.0, 0.2}, {0.0, 0.3, -0.1}, {}};
  auto tr_rot = dynamics::integrate(sch.model, H_rot, x0_rot, 10.0, opts);
  auto cons = dynamics::conservation_report(tr_rot, sch.model, H_rot, &sch);
  double j_drift = cons.j_drift ? *cons.j_drift : 1.0;

  double liouville_worst = 0.0;
  for (const auto& e : corpus::conforming()) {
    std::string h;
    if (e.model.d == 1)
      h = "(p1^2 + q1^2)/2";
    else if (e.model.d == 2)
      h = "(p1^2 + p2^2)/2 + q2^2";
    else
      h = "(p1^2 + p2^2 + p3^2)/2 + q1^2 + q3^2";
    double lr = dynamics::liouville_residual(e.model, parse(h), sample_box(e.model, 60, 777));
    liouville_worst = std::max(liouville_worst, lr);
  }

  Expr H_2d = parse("(p1^2 + p2^2 + q1^2 + q2^2)/2");
  PhasePoint x0_2{{0.4, 0.0}, {0.0, 0.3}, {}};
  auto final_state = [&](double beta) {
    auto m = corpus::kmm_2d(beta);
    return dynamics::integrate(m, H_2d, x0_2, 5.0, opts).x.back();
  };
  PhasePoint ref = final_state(0.0);
  std::vector<double> betas{1e-2, 1e-3, 1e-4}, errs;
  for (double b : betas) {
    PhasePoint xb = final_state(b);
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      err = std::max(err, std::abs(xb.q[i] - ref.q[i]));
      err = std::max(err, std::abs(xb.p[i] - ref.p[i]));
    }
    errs.push_back(err);
  }
  bool slope_ok = true;
  double slope_min = 2.0, slope_max = 0.0;
  for (size_t k = 0; k + 1 < betas.size(); ++k) {
    double slope = std::log(errs[k] / errs[k + 1]) / std::log(betas[k] / betas[k + 1]);
    slope_min = std::min(slope_min, slope);
    slope_max = std::max(slope_max, slope);
    slope_ok = slope_ok && slope >= 0.8 && slope <= 1.2;
  }

  bool ok = e_drift <= 1e-8 && j_drift <= 1e-7 && liouville_worst <= 1e-9 && slope_ok;
  report(8, label, ok,
         "energy drift " + fmt(e_drift) + " (tol 1e-8), J drift " + fmt(j_drift) +
             " (tol 1e-7), liouville " + fmt(liouville_worst) + " (tol 1e-9), response slope [" +
             fmt(slope_min) + ", " + fmt(slope_max) + "] (needs [0.8, 1.2])");
}

// 9: the check subcommand is deterministic byte for byte at a fixed seed.
void criterion_9() {
  const std::string label = "check reports repeat byte for byte";
  std::string model_path = std::string(GUP_MODELS_DIR) + "/kmm3d.json";
  auto first = run_tool("check " + model_path);
  auto second = run_tool("check " + model_path);
  bool ok = first.code == 0 && second.code == 0 && !first.out.empty() && first.out == second.out;
  std::ostringstream os;
  os << "exit " << first.code << "/" << second.code << ", " << first.out.size() << " bytes, "
     << (first.out == second.out ? "identical" : "DIFFER");
  report(9, label, ok, os.str());
}

}  // namespace

int main() {
  guarded(1, "planar f reconstructed from the generating function", criterion_1);
  guarded(2, "a recovered from the quadratic profile, brackets induced", criterion_2);
  guarded(3, "radial quadrature reproduces sqrt(1 + alpha rho^2)", criterion_3);
  guarded(4, "closure verdict matches the jacobi defect corpus-wide", criterion_4);
  guarded(5, "strange family separates admissible from inadmissible S", criterion_5);
  guarded(6, "angular families, transversality, shifted-scheme breakage", criterion_6);
  guarded(7, "operator jacobi identity and its leading grade", criterion_7);
  guarded(8, "integrator conservation, invariant density, deformation scaling", criterion_8);
  guarded(9, "check reports repeat byte for byte", criterion_9);

  std::printf("%d of 9 criteria passed\n", 9 - g_failures);
  return g_failures;
}
