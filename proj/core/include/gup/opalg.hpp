#pragma once

#include "gup/model.hpp"
#include "gup/poly.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace gup {
namespace opalg {

struct OpalgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// raised when a coefficient leaves the polynomial ring (sqrt, exp, division)
struct NonPolynomial : OpalgError {
  using OpalgError::OpalgError;
};

// Where momentum coefficients sit in the canonical form of an operator and,
// equally, in the defining relation [q_i, q_j] = ih (S_ij -+ g q) read as an
// ordered operator.
enum class Ordering { MomentaLeft, MomentaRight };

// Exact operator counterpart of a GupModel with polynomial data:
//   [p_i, p_j] = 0
//   [q_i, p_j] = ih f(p) delta_ij
//   [q_i, q_j] = ih L_ij,   L_ij = S_ij - g_j q_i + g_i q_j  (ordered)
// g is always the formal gradient of f; all coefficients are polynomials in
// p_1..p_d over the rationals.
struct QuantumModel {
  int d = 0;
  Ordering ordering = Ordering::MomentaLeft;
  MultiPoly f;              // d momentum variables
  std::vector<MultiPoly> g; // g_i = df/dp_i, derived
  std::vector<MultiPoly> S; // upper triangle, row-major
  std::string tag;          // identity used for mismatch checks

  const MultiPoly& S_upper(int i, int j) const;  // 1-based, i < j
  MultiPoly S_signed(int i, int j) const;        // antisymmetric extension
};

// Classical model -> quantum model. Parameters must carry exact rational
// values; f must expand to a polynomial in the momenta alone; each L_ij must
// be exactly S_ij - (df/dp_j) q_i + (df/dp_i) q_j for some momentum
// polynomials S_ij. Throws NonPolynomial or OpalgError otherwise.
QuantumModel quantum_model(const GupModel& m, Ordering ordering);

// Direct assembly; g is derived from f, S defaults to all zero.
QuantumModel make_quantum_model(int d, MultiPoly f, std::vector<MultiPoly> S_upper,
                                Ordering ordering, std::string tag);

// A word in the free algebra: formal sum of products of q's and momentum
// polynomials (p_i itself is the degree-one polynomial). Each term carries a
// formal (ih)^hbar prefactor and a rational scale.
struct QAtom {
  int i = 0;  // 1-based
};
using Atom = std::variant<QAtom, MultiPoly>;

struct RawTerm {
  int hbar = 0;
  Rational scale = 1;
  std::vector<Atom> atoms;  // empty product = 1
};

struct RawOp {
  int d = 0;
  std::vector<RawTerm> terms;
};

RawOp q_op(int d, int i);
RawOp p_op(int d, int i);
RawOp poly_op(MultiPoly c);
RawOp const_op(int d, const Rational& r);
// axis < d names q_{axis+1}, otherwise p_{axis-d+1}
RawOp axis_op(int d, int axis);
RawOp product(const RawOp& a, const RawOp& b);
RawOp sum(const RawOp& a, const RawOp& b);
RawOp scaled(const RawOp& a, const Rational& s);
RawOp negate(const RawOp& a);

// Canonical form: sum of (ih)^n * coeff(p) * q-monomial, the monomial indices
// ascending. MomentaRight mirrors with the coefficient on the right; the
// stored data is identical, only the meaning (and printing) changes.
struct TermKey {
  int hbar = 0;
  std::vector<int> qmono;  // exponent per coordinate
  bool operator<(const TermKey& o) const {
    if (hbar != o.hbar) return hbar < o.hbar;
    return qmono < o.qmono;
  }
};

struct NormalOp {
  int d = 0;
  Ordering ordering = Ordering::MomentaLeft;
  std::string model_tag;
  std::map<TermKey, MultiPoly> terms;

  bool is_zero() const { return terms.empty(); }
  void add_term(int hbar, std::vector<int> qmono, const MultiPoly& coeff);
  MultiPoly coefficient(int hbar, const std::vector<int>& qmono) const;
  int min_hbar() const;  // throws on zero operator
  // all terms at one hbar power, grade dropped
  NormalOp graded_part(int hbar) const;
  // the hbar-grade read back as a commutative polynomial in (q_1..q_d,
  // p_1..p_d), coordinates first
  MultiPoly grade_as_classical(int hbar) const;
  // shift every grade down by k powers of (ih); throws if any term sits below
  NormalOp reduce_hbar(int k) const;

  std::string to_string() const;
};

NormalOp operator+(const NormalOp& a, const NormalOp& b);
NormalOp operator-(const NormalOp& a, const NormalOp& b);

// Which redex is contracted first during normalization. The normal form does
// not depend on the choice whenever the model's classical data closes; the
// option exists so tests can demonstrate exactly that.
enum class RedexPolicy { Leftmost, Rightmost };

NormalOp normalize(const QuantumModel& qm, const RawOp& w,
                   RedexPolicy policy = RedexPolicy::Leftmost);

RawOp to_raw(const NormalOp& a);

// normalize(AB - BA); throws OpalgError when a and b disagree on model or
// ordering.
NormalOp commutator(const QuantumModel& qm, const NormalOp& a, const NormalOp& b);

// ([A,[B,C]] + [B,[C,A]] + [C,[A,B]]) / (ih) for coordinate operators given
// as axes (see axis_op). The double-commutator sum is homogeneous of degree
// two in (ih); one power is divided out so the grade-one part is the
// classical Jacobi defect of the underlying Poisson data.
NormalOp quantum_jacobi_residual(const QuantumModel& qm, int a, int b, int c);

}  // namespace opalg
}  // namespace gup
