#include "gup/opalg.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <utility>

namespace gup {
namespace opalg {

namespace {

int upper_index(int d, int i, int j) {
  // row-major upper triangle, 1-based i < j; same layout as GupModel::L
  return (i - 1) * d - (i - 1) * i / 2 + (j - i - 1);
}

std::vector<std::string> momentum_names(int d) {
  std::vector<std::string> names;
  for (int i = 1; i <= d; ++i) names.push_back("p" + std::to_string(i));
  return names;
}

std::vector<std::string> phase_names(int d) {
  std::vector<std::string> names;
  for (int i = 1; i <= d; ++i) names.push_back("q" + std::to_string(i));
  for (int i = 1; i <= d; ++i) names.push_back("p" + std::to_string(i));
  return names;
}

}  // namespace

const MultiPoly& QuantumModel::S_upper(int i, int j) const {
  return S[upper_index(d, i, j)];
}

MultiPoly QuantumModel::S_signed(int i, int j) const {
  if (i == j) return MultiPoly(d);
  if (i < j) return S_upper(i, j);
  return -S_upper(j, i);
}

QuantumModel make_quantum_model(int d, MultiPoly f, std::vector<MultiPoly> S_upper,
                                Ordering ordering, std::string tag) {
  if (d < 1) throw OpalgError("dimension must be positive");
  if (f.nvars() != d) throw OpalgError("f must be a polynomial in d momentum variables");
  if (static_cast<int>(S_upper.size()) != d * (d - 1) / 2)
    throw OpalgError("S must fill the upper triangle");
  for (const auto& s : S_upper)
    if (s.nvars() != d) throw OpalgError("S entries must match the momentum variable count");
  QuantumModel qm;
  qm.d = d;
  qm.ordering = ordering;
  qm.f = std::move(f);
  for (int i = 0; i < d; ++i) qm.g.push_back(qm.f.derivative(i));
  qm.S = std::move(S_upper);
  qm.tag = std::move(tag);
  return qm;
}

QuantumModel quantum_model(const GupModel& m, Ordering ordering) {
  std::map<std::string, Expr> subst;
  for (const auto& [name, value] : m.params) {
    (void)value;
    auto it = m.exact_params.find(name);
    if (it == m.exact_params.end())
      throw OpalgError("parameter '" + name + "' has no exact rational value");
    subst.emplace(name, constant(it->second));
  }

  auto pnames = momentum_names(m.d);
  auto fpoly = expand_polynomial(substitute(m.f, subst), pnames);
  if (!fpoly) throw NonPolynomial("f is not a polynomial in the momenta");

  std::vector<MultiPoly> g;
  for (int i = 0; i < m.d; ++i) g.push_back(fpoly->derivative(i));

  auto all_names = phase_names(m.d);
  std::vector<MultiPoly> S_upper;
  for (int i = 1; i <= m.d; ++i) {
    for (int j = i + 1; j <= m.d; ++j) {
      std::string label = "L_" + std::to_string(i) + std::to_string(j);
      auto lp = expand_polynomial(substitute(m.L_at(i, j), subst), all_names);
      if (!lp) throw NonPolynomial(label + " is not polynomial in the coordinates");
      MultiPoly s(m.d), ci(m.d), cj(m.d);
      for (const auto& [mono, r] : lp->terms()) {
        int qdeg = std::accumulate(mono.begin(), mono.begin() + m.d, 0);
        MultiPoly::Mono pmono(mono.begin() + m.d, mono.end());
        if (qdeg == 0)
          s.add_term(pmono, r);
        else if (qdeg == 1 && mono[i - 1] == 1)
          ci.add_term(pmono, r);
        else if (qdeg == 1 && mono[j - 1] == 1)
          cj.add_term(pmono, r);
        else
          throw OpalgError(label + " is not affine in q_i, q_j");
      }
      if (!(ci == -g[j - 1]) || !(cj == g[i - 1]))
        throw OpalgError(label +
                         " does not have the form S - g_j q_i + g_i q_j with g the gradient of f");
      S_upper.push_back(std::move(s));
    }
  }

  return make_quantum_model(m.d, *fpoly, std::move(S_upper), ordering,
                            m.name.empty() ? "(unnamed)" : m.name);
}

RawOp q_op(int d, int i) {
  if (i < 1 || i > d) throw OpalgError("coordinate index out of range");
  RawOp w;
  w.d = d;
  w.terms.push_back(RawTerm{0, 1, {Atom{QAtom{i}}}});
  return w;
}

RawOp p_op(int d, int i) {
  if (i < 1 || i > d) throw OpalgError("coordinate index out of range");
  return poly_op(MultiPoly::variable(d, i - 1));
}

RawOp poly_op(MultiPoly c) {
  RawOp w;
  w.d = c.nvars();
  w.terms.push_back(RawTerm{0, 1, {Atom{std::move(c)}}});
  return w;
}

RawOp const_op(int d, const Rational& r) {
  RawOp w;
  w.d = d;
  w.terms.push_back(RawTerm{0, r, {}});
  return w;
}

RawOp axis_op(int d, int axis) {
  if (axis < 0 || axis >= 2 * d) throw OpalgError("coordinate axis out of range");
  return axis < d ? q_op(d, axis + 1) : p_op(d, axis - d + 1);
}

RawOp product(const RawOp& a, const RawOp& b) {
  if (a.d != b.d) throw OpalgError("operator dimension mismatch");
  RawOp w;
  w.d = a.d;
  for (const auto& ta : a.terms)
    for (const auto& tb : b.terms) {
      RawTerm t;
      t.hbar = ta.hbar + tb.hbar;
      t.scale = ta.scale * tb.scale;
      t.atoms = ta.atoms;
      t.atoms.insert(t.atoms.end(), tb.atoms.begin(), tb.atoms.end());
      w.terms.push_back(std::move(t));
    }
  return w;
}

RawOp sum(const RawOp& a, const RawOp& b) {
  if (a.d != b.d) throw OpalgError("operator dimension mismatch");
  RawOp w = a;
  w.terms.insert(w.terms.end(), b.terms.begin(), b.terms.end());
  return w;
}

RawOp scaled(const RawOp& a, const Rational& s) {
  RawOp w = a;
  for (auto& t : w.terms) t.scale *= s;
  return w;
}

RawOp negate(const RawOp& a) { return scaled(a, -1); }

void NormalOp::add_term(int hbar, std::vector<int> qmono, const MultiPoly& coeff) {
  if (coeff.is_zero()) return;
  TermKey key{hbar, std::move(qmono)};
  auto it = terms.find(key);
  if (it == terms.end()) {
    terms.emplace(std::move(key), coeff);
    return;
  }
  it->second = it->second + coeff;
  if (it->second.is_zero()) terms.erase(it);
}

MultiPoly NormalOp::coefficient(int hbar, const std::vector<int>& qmono) const {
  auto it = terms.find(TermKey{hbar, qmono});
  return it == terms.end() ? MultiPoly(d) : it->second;
}

int NormalOp::min_hbar() const {
  if (terms.empty()) throw OpalgError("zero operator has no grade");
  return terms.begin()->first.hbar;
}

NormalOp NormalOp::graded_part(int hbar) const {
  NormalOp out;
  out.d = d;
  out.ordering = ordering;
  out.model_tag = model_tag;
  for (const auto& [key, coeff] : terms)
    if (key.hbar == hbar) out.terms.emplace(key, coeff);
  return out;
}

MultiPoly NormalOp::grade_as_classical(int hbar) const {
  MultiPoly out(2 * d);
  for (const auto& [key, coeff] : terms) {
    if (key.hbar != hbar) continue;
    for (const auto& [pmono, r] : coeff.terms()) {
      MultiPoly::Mono mono = key.qmono;
      mono.insert(mono.end(), pmono.begin(), pmono.end());
      out.add_term(mono, r);
    }
  }
  return out;
}

NormalOp NormalOp::reduce_hbar(int k) const {
  NormalOp out;
  out.d = d;
  out.ordering = ordering;
  out.model_tag = model_tag;
  for (const auto& [key, coeff] : terms) {
    if (key.hbar < k) throw OpalgError("operator has terms below the requested grade shift");
    out.terms.emplace(TermKey{key.hbar - k, key.qmono}, coeff);
  }
  return out;
}

std::string NormalOp::to_string() const {
  if (terms.empty()) return "0";
  auto pnames = momentum_names(d);
  std::ostringstream os;
  bool first = true;
  for (const auto& [key, coeff] : terms) {
    if (!first) os << " + ";
    first = false;
    std::string mono;
    for (int i = 0; i < d; ++i) {
      if (key.qmono[i] == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += "q" + std::to_string(i + 1);
      if (key.qmono[i] > 1) mono += "^" + std::to_string(key.qmono[i]);
    }
    if (key.hbar > 0) {
      os << "(ih)";
      if (key.hbar > 1) os << "^" << key.hbar;
      os << "*";
    }
    std::string cs = "(" + coeff.to_string(pnames) + ")";
    if (mono.empty())
      os << cs;
    else if (ordering == Ordering::MomentaLeft)
      os << cs << "*" << mono;
    else
      os << mono << "*" << cs;
  }
  return os.str();
}

namespace {

void check_compatible(const NormalOp& a, const NormalOp& b) {
  if (a.d != b.d || a.ordering != b.ordering || a.model_tag != b.model_tag)
    throw OpalgError("operators belong to different models or orderings");
}

}  // namespace

NormalOp operator+(const NormalOp& a, const NormalOp& b) {
  check_compatible(a, b);
  NormalOp out = a;
  for (const auto& [key, coeff] : b.terms) out.add_term(key.hbar, key.qmono, coeff);
  return out;
}

NormalOp operator-(const NormalOp& a, const NormalOp& b) {
  check_compatible(a, b);
  NormalOp out = a;
  for (const auto& [key, coeff] : b.terms) out.add_term(key.hbar, key.qmono, -coeff);
  return out;
}

namespace {

// Folds constant polynomial atoms into the scale and multiplies adjacent
// momentum polynomials together. Returns false when the term is zero.
bool canonicalize(RawTerm& t, int d) {
  std::vector<Atom> out;
  for (auto& a : t.atoms) {
    if (std::holds_alternative<QAtom>(a)) {
      out.push_back(std::move(a));
      continue;
    }
    MultiPoly& c = std::get<MultiPoly>(a);
    if (c.nvars() != d) throw OpalgError("coefficient variable count mismatch");
    if (c.is_zero()) return false;
    bool is_const = c.terms().size() == 1 &&
                    std::all_of(c.terms().begin()->first.begin(), c.terms().begin()->first.end(),
                                [](int e) { return e == 0; });
    if (is_const) {
      t.scale *= c.terms().begin()->second;
      continue;
    }
    if (!out.empty() && std::holds_alternative<MultiPoly>(out.back()))
      std::get<MultiPoly>(out.back()) = std::get<MultiPoly>(out.back()) * c;
    else
      out.push_back(std::move(a));
  }
  t.atoms = std::move(out);
  return t.scale != 0;
}

bool is_redex(const Atom& x, const Atom& y, Ordering o) {
  bool xq = std::holds_alternative<QAtom>(x);
  bool yq = std::holds_alternative<QAtom>(y);
  if (xq && yq) return std::get<QAtom>(x).i > std::get<QAtom>(y).i;
  if (o == Ordering::MomentaLeft) return xq && !yq;
  return !xq && yq;
}

int find_redex(const RawTerm& t, Ordering o, RedexPolicy policy) {
  int n = static_cast<int>(t.atoms.size());
  if (policy == RedexPolicy::Leftmost) {
    for (int k = 0; k + 1 < n; ++k)
      if (is_redex(t.atoms[k], t.atoms[k + 1], o)) return k;
  } else {
    for (int k = n - 2; k >= 0; --k)
      if (is_redex(t.atoms[k], t.atoms[k + 1], o)) return k;
  }
  return -1;
}

// One rewrite of the pair at position k; replacement fragments are pushed
// back onto the worklist. Every correction raises the hbar grade by one.
void rewrite_at(const QuantumModel& qm, const RawTerm& t, int k, std::vector<RawTerm>& work) {
  auto emit = [&](int dh, const Rational& sc, std::vector<Atom> mid) {
    RawTerm n;
    n.hbar = t.hbar + dh;
    n.scale = t.scale * sc;
    n.atoms.assign(t.atoms.begin(), t.atoms.begin() + k);
    for (auto& a : mid) n.atoms.push_back(std::move(a));
    n.atoms.insert(n.atoms.end(), t.atoms.begin() + k + 2, t.atoms.end());
    work.push_back(std::move(n));
  };

  const Atom& x = t.atoms[k];
  const Atom& y = t.atoms[k + 1];
  bool xq = std::holds_alternative<QAtom>(x);
  bool yq = std::holds_alternative<QAtom>(y);

  if (xq && !yq) {
    // q_i c = c q_i + ih f dc/dp_i
    int i = std::get<QAtom>(x).i;
    const MultiPoly& c = std::get<MultiPoly>(y);
    emit(0, 1, {Atom{c}, Atom{QAtom{i}}});
    emit(1, 1, {Atom{qm.f * c.derivative(i - 1)}});
    return;
  }
  if (!xq && yq) {
    // c q_i = q_i c - ih f dc/dp_i
    int i = std::get<QAtom>(y).i;
    const MultiPoly& c = std::get<MultiPoly>(x);
    emit(0, 1, {Atom{QAtom{i}}, Atom{c}});
    emit(1, -1, {Atom{qm.f * c.derivative(i - 1)}});
    return;
  }

  // q_i q_j with i > j: swap plus ih L_ij, where
  // L_ij = -L_ji = -S_ji + g_i q_j - g_j q_i, coefficients placed per the
  // model's ordering.
  int i = std::get<QAtom>(x).i;
  int j = std::get<QAtom>(y).i;
  emit(0, 1, {Atom{QAtom{j}}, Atom{QAtom{i}}});
  emit(1, -1, {Atom{qm.S_upper(j, i)}});
  if (qm.ordering == Ordering::MomentaLeft) {
    emit(1, 1, {Atom{qm.g[i - 1]}, Atom{QAtom{j}}});
    emit(1, -1, {Atom{qm.g[j - 1]}, Atom{QAtom{i}}});
  } else {
    emit(1, 1, {Atom{QAtom{j}}, Atom{qm.g[i - 1]}});
    emit(1, -1, {Atom{QAtom{i}}, Atom{qm.g[j - 1]}});
  }
}

void emit_normal(NormalOp& out, const RawTerm& t, const QuantumModel& qm) {
  std::vector<int> qmono(qm.d, 0);
  MultiPoly coeff = MultiPoly::constant(qm.d, t.scale);
  bool seen_q = false, seen_poly = false;
  for (const auto& a : t.atoms) {
    if (std::holds_alternative<QAtom>(a)) {
      qmono[std::get<QAtom>(a).i - 1] += 1;
      seen_q = true;
    } else {
      // left ordering: coefficient precedes all q's; right: follows them
      bool misplaced = qm.ordering == Ordering::MomentaLeft ? seen_q : false;
      if (seen_poly || misplaced)
        throw OpalgError("internal error: term escaped normalization");
      coeff = coeff * std::get<MultiPoly>(a);
      if (qm.ordering == Ordering::MomentaRight) seen_poly = true;
    }
  }
  out.add_term(t.hbar, std::move(qmono), coeff);
}

}  // namespace

NormalOp normalize(const QuantumModel& qm, const RawOp& w, RedexPolicy policy) {
  if (w.d != qm.d) throw OpalgError("operator dimension does not match the model");
  NormalOp out;
  out.d = qm.d;
  out.ordering = qm.ordering;
  out.model_tag = qm.tag;

  std::vector<RawTerm> work(w.terms.begin(), w.terms.end());
  while (!work.empty()) {
    RawTerm t = std::move(work.back());
    work.pop_back();
    if (!canonicalize(t, qm.d)) continue;
    int k = find_redex(t, qm.ordering, policy);
    if (k < 0)
      emit_normal(out, t, qm);
    else
      rewrite_at(qm, t, k, work);
  }
  return out;
}

RawOp to_raw(const NormalOp& a) {
  RawOp w;
  w.d = a.d;
  for (const auto& [key, coeff] : a.terms) {
    RawTerm t;
    t.hbar = key.hbar;
    if (a.ordering == Ordering::MomentaLeft) t.atoms.push_back(Atom{coeff});
    for (int i = 0; i < a.d; ++i)
      for (int rep = 0; rep < key.qmono[i]; ++rep) t.atoms.push_back(Atom{QAtom{i + 1}});
    if (a.ordering == Ordering::MomentaRight) t.atoms.push_back(Atom{coeff});
    w.terms.push_back(std::move(t));
  }
  return w;
}

NormalOp commutator(const QuantumModel& qm, const NormalOp& a, const NormalOp& b) {
  check_compatible(a, b);
  if (a.d != qm.d || a.ordering != qm.ordering || a.model_tag != qm.tag)
    throw OpalgError("operators do not belong to the given model");
  RawOp ra = to_raw(a), rb = to_raw(b);
  return normalize(qm, sum(product(ra, rb), negate(product(rb, ra))));
}

NormalOp quantum_jacobi_residual(const QuantumModel& qm, int a, int b, int c) {
  NormalOp A = normalize(qm, axis_op(qm.d, a));
  NormalOp B = normalize(qm, axis_op(qm.d, b));
  NormalOp C = normalize(qm, axis_op(qm.d, c));
  NormalOp s = commutator(qm, A, commutator(qm, B, C)) +
               commutator(qm, B, commutator(qm, C, A)) +
               commutator(qm, C, commutator(qm, A, B));
  // the double-commutator sum of coordinates is homogeneous at (ih)^2, so the
  // shift below never throws; the grade-one part of the result is the
  // classical Jacobi defect
  return s.reduce_hbar(1);
}

}  // namespace opalg
}  // namespace gup
