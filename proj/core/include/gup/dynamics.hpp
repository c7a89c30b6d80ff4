#pragma once

#include "gup/angular.hpp"
#include "gup/model.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace gup {
namespace dynamics {

struct DynamicsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// The flow reached the degenerate surface: f dropped to the guard value. The
// structure matrices blow up as 1/f there, so integration aborts.
struct DomainExit : DynamicsError {
  using DynamicsError::DynamicsError;
};

// v = pi grad H in coordinates (q1..qd, p1..pd):
//   dq_i/dt = sum_j L_ij dH/dq_j + f dH/dp_i
//   dp_i/dt = -f dH/dq_i
std::vector<double> hamiltonian_vector_field(const GupModel& m, const Expr& H,
                                             const PhasePoint& x);

enum class Method { RK4, RK45 };

struct IntegrateOptions {
  double dt = 1e-3;       // fixed step for RK4, initial step for RK45
  Method method = Method::RK4;
  double f_min = 1e-6;    // abort threshold on f
  double rtol = 1e-8;     // RK45 only
  double atol = 1e-10;    // RK45 only
};

struct Trajectory {
  std::vector<double> t;
  std::vector<PhasePoint> x;  // coordinates only; parameters live on the model
  Method method = Method::RK4;
  double dt = 0.0;
};

// Integrates from x0 to t_end. Throws DomainExit when f(x) <= f_min at any
// stage evaluation.
Trajectory integrate(const GupModel& m, const Expr& H, const PhasePoint& x0, double t_end,
                     const IntegrateOptions& opts = {});

struct ConservationReport {
  double energy_drift = 0.0;              // max_t |H(x(t)) - H(x(0))|
  std::optional<double> j_drift;          // max_k max_t |J_k(t) - J_k(0)|, with a scheme
};

ConservationReport conservation_report(const Trajectory& tr, const GupModel& m, const Expr& H,
                                       const angular::AngularScheme* scheme = nullptr);

// max over the sample of |sum_a d_a(f^-d X_H^a)|, the divergence of the flow
// against the invariant density f^-d, computed symbolically. Vanishes
// identically on models whose structure closes.
double liouville_residual(const GupModel& m, const Expr& H, const std::vector<PhasePoint>& pts);

// Header t,q1..qd,p1..pd,H and, when a scheme is given, J1,J2,J3.
void write_csv(std::ostream& os, const Trajectory& tr, const GupModel& m, const Expr& H,
               const angular::AngularScheme* scheme = nullptr);

}  // namespace dynamics
}  // namespace gup
