#include "gup/closure.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace gup {
namespace closure {

namespace {

constexpr double kStructureTol = 1e-10;

double max_abs_at(const Expr& e, const std::vector<PhasePoint>& pts) {
  double worst = 0;
  for (const auto& x : pts) worst = std::max(worst, std::abs(eval(e, x)));
  return worst;
}

std::vector<PhasePoint> structure_samples(const GupModel& m) {
  // fixed internal sampling used for the structural classification of L
  return sample_box(m, 48, 0x5eedu);
}

}  // namespace

Expr LDecomposition::S_at(int i, int j, int d) const {
  if (i == j) return constant(0);
  bool flip = i > j;
  if (flip) std::swap(i, j);
  int idx = (i - 1) * d - (i - 1) * i / 2 + (j - i - 1);
  return flip ? neg(S[idx]) : S[idx];
}

LDecomposition decompose_L(const GupModel& m) {
  LDecomposition dec;
  const int d = m.d;
  auto pts = structure_samples(m);

  std::map<std::string, Expr> q_to_zero;
  for (int i = 1; i <= d; ++i) q_to_zero["q" + std::to_string(i)] = constant(0);
  for (const auto& l : m.L) dec.S.push_back(simplify(substitute(l, q_to_zero)));

  dec.exact = true;
  dec.conforming = true;
  auto complain = [&](const std::string& why) {
    if (dec.conforming) dec.reason = why;
    dec.conforming = false;
  };

  // second q-derivatives must vanish for the affine form
  for (int i = 1; i <= d && dec.exact; ++i)
    for (int j = i + 1; j <= d && dec.exact; ++j) {
      Expr lij = m.L_at(i, j);
      for (int k = 1; k <= d && dec.exact; ++k) {
        Expr dk = diff(lij, {VarKind::Q, k});
        for (int l = k; l <= d; ++l)
          if (max_abs_at(diff(dk, {VarKind::Q, l}), pts) > kStructureTol) {
            dec.exact = false;
            complain("L_" + std::to_string(i) + std::to_string(j) +
                     " is not affine in the positions");
            break;
          }
      }
    }

  // g_i from d L_ij / d q_j, cross-checked over every admissible j
  dec.g.assign(d, constant(0));
  for (int i = 1; i <= d; ++i) {
    Expr gi;
    for (int j = 1; j <= d; ++j) {
      if (j == i) continue;
      Expr cand = simplify(diff(m.L_at(i, j), {VarKind::Q, j}));
      if (!gi) {
        gi = cand;
        continue;
      }
      if (max_abs_at(sub(gi, cand), pts) > kStructureTol)
        complain("inconsistent g_" + std::to_string(i) + " between column pairs");
    }
    dec.g[i - 1] = gi ? gi : constant(0);
  }

  // S and g may depend on momenta only
  for (int i = 0; i < d && dec.conforming; ++i) {
    SymbolSet s = collect_symbols(dec.g[i]);
    for (const auto& v : s.vars)
      if (v.kind == VarKind::Q)
        if (max_abs_at(diff(dec.g[i], v), pts) > kStructureTol)
          complain("g_" + std::to_string(i + 1) + " depends on a position");
  }

  if (dec.exact) {
    // mixed q-derivatives beyond the (i,j) pair must vanish, and the affine
    // reconstruction has to reproduce L
    for (int i = 1; i <= d && dec.conforming; ++i)
      for (int j = i + 1; j <= d && dec.conforming; ++j) {
        Expr lij = m.L_at(i, j);
        for (int k = 1; k <= d; ++k) {
          if (k == i || k == j) continue;
          if (max_abs_at(diff(lij, {VarKind::Q, k}), pts) > kStructureTol) {
            complain("L_" + std::to_string(i) + std::to_string(j) + " depends on q_" +
                     std::to_string(k));
            break;
          }
        }
        Expr rebuilt = add(dec.S_at(i, j, d),
                           add(neg(mul(dec.g[j - 1], qvar(i))), mul(dec.g[i - 1], qvar(j))));
        if (max_abs_at(sub(lij, rebuilt), pts) > kStructureTol)
          complain("L_" + std::to_string(i) + std::to_string(j) +
                   " does not match the antisymmetric affine pattern");
      }
  }

  // the q-coefficient vector must be curl-free: it doubles as a momentum
  // gradient, so a rotational part can never close the form
  if (dec.conforming) {
    for (int i = 1; i <= d && dec.conforming; ++i)
      for (int j = i + 1; j <= d; ++j) {
        Expr curl = sub(diff(dec.g[i - 1], {VarKind::P, j}), diff(dec.g[j - 1], {VarKind::P, i}));
        if (max_abs_at(curl, pts) > kStructureTol) {
          complain("q-coefficient pattern fails the antisymmetric affine form: g is not a gradient");
          break;
        }
      }
  }

  return dec;
}

double q_independence_residual(const GupModel& m, const std::vector<PhasePoint>& pts) {
  double worst = 0;
  for (int k = 1; k <= m.d; ++k)
    worst = std::max(worst, max_abs_at(diff(m.f, {VarKind::Q, k}), pts));
  return worst;
}

double gradient_residual(const GupModel& m, const std::vector<PhasePoint>& pts) {
  LDecomposition dec = decompose_L(m);
  double worst = 0;
  for (int i = 1; i <= m.d; ++i) {
    Expr r = sub(diff(m.f, {VarKind::P, i}), dec.g[i - 1]);
    worst = std::max(worst, max_abs_at(r, pts));
  }
  return worst;
}

namespace {

// 2 (f_k A_ij + f_i A_jk + f_j A_ki) - f (dA_ij/dp_k + dA_jk/dp_i + dA_ki/dp_j)
Expr strange_cycle(const GupModel& m, const Expr& Aij, const Expr& Ajk, const Expr& Aki,
                   int i, int j, int k) {
  Expr fi = diff(m.f, {VarKind::P, i});
  Expr fj = diff(m.f, {VarKind::P, j});
  Expr fk = diff(m.f, {VarKind::P, k});
  Expr lead = mul(constant(2),
                  add(mul(fk, Aij), add(mul(fi, Ajk), mul(fj, Aki))));
  Expr trail = mul(m.f, add(diff(Aij, {VarKind::P, k}),
                            add(diff(Ajk, {VarKind::P, i}), diff(Aki, {VarKind::P, j}))));
  return sub(lead, trail);
}

}  // namespace

StrangeResidual strange_residual(const GupModel& m, const std::vector<PhasePoint>& pts) {
  StrangeResidual r;
  if (m.d < 3) return r;
  LDecomposition dec = decompose_L(m);
  for (int i = 1; i <= m.d; ++i)
    for (int j = i + 1; j <= m.d; ++j)
      for (int k = j + 1; k <= m.d; ++k) {
        Expr full = strange_cycle(m, m.L_at(i, j), m.L_at(j, k), m.L_at(k, i), i, j, k);
        r.full = std::max(r.full, max_abs_at(full, pts));
        Expr sonly = strange_cycle(m, dec.S_at(i, j, m.d), dec.S_at(j, k, m.d),
                                   dec.S_at(k, i, m.d), i, j, k);
        r.s_only = std::max(r.s_only, max_abs_at(sonly, pts));
      }
  return r;
}

Expr coordinate_expr(const GupModel& m, int a) {
  return a < m.d ? qvar(a + 1) : pvar(a - m.d + 1);
}

namespace {

// fundamental bracket {x^a, x^b} as an expression
Expr fundamental(const GupModel& m, int a, int b) {
  int d = m.d;
  bool aq = a < d, bq = b < d;
  if (aq && bq) return m.L_at(a + 1, b + 1);
  if (!aq && !bq) return constant(0);
  if (aq && !bq) return a == b - d ? m.f : constant(0);
  return a - d == b ? neg(m.f) : constant(0);
}

}  // namespace

Expr jacobi_triple_expr(const GupModel& m, int a, int b, int c) {
  Expr sum = constant(0);
  int idx[3] = {a, b, c};
  for (int r = 0; r < 3; ++r) {
    int u = idx[r], v = idx[(r + 1) % 3], w = idx[(r + 2) % 3];
    sum = add(sum, bracket_expr(m, coordinate_expr(m, u), fundamental(m, v, w)));
  }
  return sum;
}

double jacobi_residual(const GupModel& m, const std::vector<PhasePoint>& pts) {
  double worst = 0;
  int n = 2 * m.d;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        worst = std::max(worst, max_abs_at(jacobi_triple_expr(m, a, b, c), pts));
  return worst;
}

ClosureReport closure_check(const GupModel& m, const Box& box, int n, std::uint64_t seed,
                            double tol) {
  ClosureReport out;
  out.report.model_name = m.name;
  out.report.seed = seed;
  out.report.n_points = n;
  out.report.region = box;

  if (m.d == 1) {
    // a single pair (q1, p1): the 2-form is closed for any positive f
    out.report.add("closure", 0.0, tol, "one degree of freedom closes trivially");
    out.decomposition.exact = true;
    out.decomposition.conforming = true;
    out.pass = true;
    return out;
  }

  auto pts = sample_box(box, m.d, n, seed, m.params);
  out.decomposition = decompose_L(m);

  out.report.add("q-independence", q_independence_residual(m, pts), tol);

  if (!out.decomposition.exact) {
    out.report.items.push_back(
        {"L-decomposition", 1.0, 0.0, false, "nonconforming L: " + out.decomposition.reason});
  } else {
    if (!out.decomposition.conforming)
      out.report.items.push_back(
          {"L-decomposition", 1.0, 0.0, false, "nonconforming L: " + out.decomposition.reason});
    out.report.add("momentum-gradient", gradient_residual(m, pts), tol);
    if (m.d >= 3) {
      StrangeResidual sr = strange_residual(m, pts);
      out.report.add("mixed-cycle", sr.full, tol);
      out.report.add("mixed-cycle-s", sr.s_only, tol,
                     "same family reduced to the q-free part of L");
    }
  }

  out.report.add("jacobi", jacobi_residual(m, pts), tol);
  out.pass = out.report.passed();
  return out;
}

}  // namespace closure
}  // namespace gup
