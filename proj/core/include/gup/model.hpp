#pragma once

#include "gup/expr.hpp"
#include "gup/report.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gup {

// A deformed phase space in d degrees of freedom:
//
//   {p_i, p_j} = 0        {q_i, p_j} = f(q,p) delta_ij
//   {q_i, q_j} = L_ij(q,p)
//
// f is scalar, L antisymmetric; only the upper triangle (row-major
// (1,2),(1,3),...,(2,3),...) is stored. Parameters appearing in the
// expressions carry numeric values in params; exact_params optionally holds
// the same values as exact rationals for the operator algebra.
struct GupModel {
  int d = 0;
  Expr f;
  std::vector<Expr> L;  // upper triangle
  std::map<std::string, double> params;
  std::map<std::string, Rational> exact_params;
  Box domain;
  std::string name;

  // 1-based, antisymmetric: L_at(j,i) = -L_at(i,j), L_at(i,i) = 0
  Expr L_at(int i, int j) const;
  int upper_size() const { return d * (d - 1) / 2; }
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Validates dimension, triangle size, coordinate indices and parameter
// bindings; throws ModelError on any violation.
GupModel make_model(int d, Expr f, std::vector<Expr> L_upper,
                    std::map<std::string, double> params = {},
                    std::string name = "", Box domain = {});

// Evaluation context: the model's parameters merged under the point's own.
PhasePoint with_params(const GupModel& m, PhasePoint x);

// Dense square matrix just big enough for the 2d x 2d structure matrices.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}
  int n() const { return n_; }
  double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

Mat matmul(const Mat& a, const Mat& b);
double determinant(Mat a);               // LU with partial pivoting
double max_abs_identity_diff(const Mat& a);

// Coordinate order for the 2d x 2d matrices is (q1..qd, p1..pd).
// poisson:    [[ L        f I ]      symplectic (its inverse):
//              [ -f I      0  ]]       [[ 0        -(1/f) I   ]
//                                       [ (1/f) I  (1/f^2) L  ]]
Mat poisson_matrix(const GupModel& m, const PhasePoint& x);
Mat symplectic_matrix(const GupModel& m, const PhasePoint& x);  // throws EvalError when f = 0

// {F, G} as an expression; numeric bracket evaluates it at x.
Expr bracket_expr(const GupModel& m, const Expr& F, const Expr& G);
double bracket(const GupModel& m, const Expr& F, const Expr& G, const PhasePoint& x);

// Deterministic, platform-independent sampling of the domain box. Points with
// |p| below a small floor are rejected so radial expressions stay smooth.
std::vector<PhasePoint> sample_box(const GupModel& m, int n, std::uint64_t seed);
std::vector<PhasePoint> sample_box(const Box& box, int d, int n, std::uint64_t seed,
                                   const std::map<std::string, double>& params);

struct NondegeneracyReport {
  double min_f = 0.0;
  PhasePoint argmin;
  bool pass = false;
  // When f has the radial form c + k rho^2 with k < 0, the positive-f region
  // is the ball rho^2 < c/|k|; its squared radius is reported.
  std::optional<double> ball_radius2;
};

NondegeneracyReport nondegeneracy_report(const GupModel& m, const Box& box, int n,
                                         std::uint64_t seed);

}  // namespace gup
