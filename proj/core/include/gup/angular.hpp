#pragma once

#include "gup/model.hpp"
#include "gup/report.hpp"

#include <array>
#include <map>
#include <string>

namespace gup {
namespace angular {

struct AngularError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rotationally covariant 3D scheme: position brackets proportional to the
// generators,
//
//   {q_i, q_j} = a(rho) eps_ijk J_k,
//   J_k = s_k(p) + (1/f) (momentum-position kernel),
//
// with rho the momentum radius. Building the scheme materializes the induced
// model (f and L as functions on phase space) next to the radial data.
struct AngularScheme {
  Expr a_rho, f_rho;        // radial inputs
  std::array<Expr, 3> s;    // momentum-only shifts
  std::array<Expr, 3> J;    // generators on phase space
  Expr a_p, f_p;            // radial inputs with rho = |p| substituted
  GupModel model;           // induced d = 3 model
};

// s defaults to zero. a and f may reference rho and parameters only.
AngularScheme build_scheme(const Expr& a, const Expr& f,
                           const std::map<std::string, double>& params = {},
                           const std::array<Expr, 3>* s = nullptr);

struct AngularReport {
  double q_family = 0.0;   // {J_i, q_j} - eps_ijk q_k
  double p_family = 0.0;   // {J_i, p_j} - eps_ijk p_k
  double jj_family = 0.0;  // {J_i, J_j} - eps_ijk J_k
  bool pass = false;
  double tol = 0.0;
};
AngularReport check_angular_algebra(const AngularScheme& sch,
                                    const std::vector<PhasePoint>& pts, double tol = 1e-9);

double p_dot_J(const AngularScheme& sch, const PhasePoint& x);

// Determinant of the linear system that forces the shifts s to vanish,
// f^-2 (f^2 + a rho^2). Vanishing determinant marks the singular surface
// a rho^2 = -f^2; on it the alternative branch is the excluded cone f
// proportional to rho.
struct SDeterminant {
  double value = 0.0;
  bool singular = false;
};
SDeterminant s_system_determinant(const AngularScheme& sch, const PhasePoint& x);

// max_k |{J_k, H}| over the sample; zero for rotation-invariant H.
double rotation_invariance_residual(const AngularScheme& sch, const Expr& H,
                                    const std::vector<PhasePoint>& pts);

// Residual of the nine constraint equations tying s to a and f. Identically
// zero when s = 0.
double shift_system_residual(const AngularScheme& sch, const std::vector<PhasePoint>& pts);

}  // namespace angular
}  // namespace gup
