#pragma once

#include "gup/model.hpp"
#include "gup/report.hpp"

#include <string>
#include <vector>

namespace gup {
namespace closure {

// Splits an affine-in-q antisymmetric structure
//
//   L_ij = S_ij(p) - g_j(p) q_i + g_i(p) q_j
//
// into its S and g parts. `exact` records that L really is affine in q and
// the reconstruction matches. `conforming` additionally requires a single
// consistent g across all index pairs, S and g free of q, and g curl-free
// (without that no scalar f can generate the q-coefficients, so the pattern
// is incompatible with the affine form).
struct LDecomposition {
  std::vector<Expr> S;  // upper triangle, same layout as GupModel::L
  std::vector<Expr> g;  // size d
  bool exact = false;
  bool conforming = false;
  std::string reason;   // empty when conforming

  Expr S_at(int i, int j, int d) const;
};

LDecomposition decompose_L(const GupModel& m);

// Residual families behind the closedness of the symplectic form. All of
// them are max-abs over the supplied sample points.
double q_independence_residual(const GupModel& m, const std::vector<PhasePoint>& pts);
double gradient_residual(const GupModel& m, const std::vector<PhasePoint>& pts);

struct StrangeResidual {
  double full = 0.0;    // in terms of L
  double s_only = 0.0;  // same family expressed through S alone
};
StrangeResidual strange_residual(const GupModel& m, const std::vector<PhasePoint>& pts);

// Jacobi identity defect of the fundamental brackets, max over all coordinate
// triples and points. jacobi_triple_expr exposes one symbolic summand:
// coordinates are indexed 0..2d-1 in the order (q1..qd, p1..pd).
Expr coordinate_expr(const GupModel& m, int a);
Expr jacobi_triple_expr(const GupModel& m, int a, int b, int c);
double jacobi_residual(const GupModel& m, const std::vector<PhasePoint>& pts);

struct ClosureReport {
  CheckReport report;
  LDecomposition decomposition;
  bool pass = false;
};

// Aggregate check at n sampled points. One-dimensional models pass without
// conditions: every 2-form on a 2-dimensional manifold is closed.
ClosureReport closure_check(const GupModel& m, const Box& box, int n, std::uint64_t seed,
                            double tol = 1e-9);

}  // namespace closure
}  // namespace gup
