#include "gup/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

namespace gup {

Expr GupModel::L_at(int i, int j) const {
  if (i == j) return constant(0);
  bool flip = i > j;
  if (flip) std::swap(i, j);
  // row-major upper triangle offset for 1-based (i, j), i < j
  int idx = (i - 1) * d - (i - 1) * i / 2 + (j - i - 1);
  const Expr& e = L[idx];
  return flip ? neg(e) : e;
}

GupModel make_model(int d, Expr f, std::vector<Expr> L_upper,
                    std::map<std::string, double> params, std::string name,
                    Box domain) {
  if (d < 1) throw ModelError("dimension must be >= 1");
  if (static_cast<int>(L_upper.size()) != d * (d - 1) / 2)
    throw ModelError("upper triangle needs " + std::to_string(d * (d - 1) / 2) +
                     " entries, got " + std::to_string(L_upper.size()));
  GupModel m;
  m.d = d;
  m.f = std::move(f);
  m.L = std::move(L_upper);
  m.params = std::move(params);
  m.name = std::move(name);
  m.domain = domain;

  auto check_symbols = [&](const Expr& e, const std::string& where) {
    SymbolSet s = collect_symbols(e);
    for (const auto& v : s.vars)
      if (v.index < 1 || v.index > m.d)
        throw ModelError(where + ": coordinate " + v.name() + " outside dimension " +
                         std::to_string(m.d));
    for (const auto& p : s.params)
      if (!m.params.count(p))
        throw ModelError(where + ": parameter '" + p + "' has no value");
  };
  check_symbols(m.f, "f");
  for (std::size_t k = 0; k < m.L.size(); ++k)
    check_symbols(m.L[k], "L[" + std::to_string(k) + "]");
  return m;
}

PhasePoint with_params(const GupModel& m, PhasePoint x) {
  for (const auto& [k, v] : m.params) x.params.emplace(k, v);
  return x;
}

Mat matmul(const Mat& a, const Mat& b) {
  Mat r(a.n());
  for (int i = 0; i < a.n(); ++i)
    for (int k = 0; k < a.n(); ++k) {
      double aik = a.at(i, k);
      if (aik == 0) continue;
      for (int j = 0; j < a.n(); ++j) r.at(i, j) += aik * b.at(k, j);
    }
  return r;
}

double determinant(Mat a) {
  int n = a.n();
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a.at(r, c)) > std::abs(a.at(piv, c))) piv = r;
    if (a.at(piv, c) == 0) return 0.0;
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(a.at(piv, j), a.at(c, j));
      det = -det;
    }
    det *= a.at(c, c);
    for (int r = c + 1; r < n; ++r) {
      double factor = a.at(r, c) / a.at(c, c);
      if (factor == 0) continue;
      for (int j = c; j < n; ++j) a.at(r, j) -= factor * a.at(c, j);
    }
  }
  return det;
}

double max_abs_identity_diff(const Mat& a) {
  double worst = 0;
  for (int i = 0; i < a.n(); ++i)
    for (int j = 0; j < a.n(); ++j)
      worst = std::max(worst, std::abs(a.at(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

Mat poisson_matrix(const GupModel& m, const PhasePoint& x) {
  PhasePoint ctx = with_params(m, x);
  int d = m.d;
  Mat pi(2 * d);
  double fv = eval(m.f, ctx);
  for (int i = 1; i <= d; ++i) {
    for (int j = 1; j <= d; ++j)
      if (i != j) pi.at(i - 1, j - 1) = eval(m.L_at(i, j), ctx);
    pi.at(i - 1, d + i - 1) = fv;
    pi.at(d + i - 1, i - 1) = -fv;
  }
  return pi;
}

Mat symplectic_matrix(const GupModel& m, const PhasePoint& x) {
  PhasePoint ctx = with_params(m, x);
  int d = m.d;
  double fv = eval(m.f, ctx);
  if (fv == 0) throw EvalError("symplectic matrix undefined where f = 0");
  Mat w(2 * d);
  for (int i = 1; i <= d; ++i) {
    w.at(i - 1, d + i - 1) = -1.0 / fv;
    w.at(d + i - 1, i - 1) = 1.0 / fv;
    for (int j = 1; j <= d; ++j)
      if (i != j) w.at(d + i - 1, d + j - 1) = eval(m.L_at(i, j), ctx) / (fv * fv);
  }
  return w;
}

Expr bracket_expr(const GupModel& m, const Expr& F, const Expr& G) {
  int d = m.d;
  std::vector<Expr> Fq(d), Fp(d), Gq(d), Gp(d);
  for (int i = 1; i <= d; ++i) {
    Fq[i - 1] = diff(F, {VarKind::Q, i});
    Fp[i - 1] = diff(F, {VarKind::P, i});
    Gq[i - 1] = diff(G, {VarKind::Q, i});
    Gp[i - 1] = diff(G, {VarKind::P, i});
  }
  Expr acc = constant(0);
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j) {
      if (i == j) continue;
      acc = add(acc, mul(m.L_at(i, j), mul(Fq[i - 1], Gq[j - 1])));
    }
  Expr cross = constant(0);
  for (int i = 0; i < d; ++i)
    cross = add(cross, sub(mul(Fq[i], Gp[i]), mul(Fp[i], Gq[i])));
  return add(acc, mul(m.f, cross));
}

double bracket(const GupModel& m, const Expr& F, const Expr& G, const PhasePoint& x) {
  return eval(bracket_expr(m, F, G), with_params(m, x));
}

namespace {

// 53-bit uniform in [0,1): identical across platforms for a fixed seed.
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<PhasePoint> sample_box(const Box& box, int d, int n, std::uint64_t seed,
                                   const std::map<std::string, double>& params) {
  std::mt19937_64 rng(seed);
  std::vector<PhasePoint> pts;
  pts.reserve(n);
  while (static_cast<int>(pts.size()) < n) {
    PhasePoint x;
    x.q.resize(d);
    x.p.resize(d);
    for (int i = 0; i < d; ++i) x.q[i] = box.q_lo + (box.q_hi - box.q_lo) * next_unit(rng);
    double pnorm2 = 0;
    for (int i = 0; i < d; ++i) {
      x.p[i] = box.p_lo + (box.p_hi - box.p_lo) * next_unit(rng);
      pnorm2 += x.p[i] * x.p[i];
    }
    if (pnorm2 < 1e-8) continue;  // keep radial quantities differentiable
    x.params = params;
    pts.push_back(std::move(x));
  }
  return pts;
}

std::vector<PhasePoint> sample_box(const GupModel& m, int n, std::uint64_t seed) {
  return sample_box(m.domain, m.d, n, seed, m.params);
}

namespace {

// Detects f = c + k (p1^2 + ... + pd^2) numerically: fit c and k from probes,
// then confirm on a handful of off-axis points.
std::optional<std::pair<double, double>> radial_quadratic_fit(const GupModel& m) {
  try {
    PhasePoint origin;
    origin.q.assign(m.d, 0.0);
    origin.p.assign(m.d, 0.0);
    origin.params = m.params;
    double c = eval(m.f, origin);
    PhasePoint probe = origin;
    probe.p[0] = 0.25;
    double k = (eval(m.f, probe) - c) / (0.25 * 0.25);
    std::mt19937_64 rng(7);
    for (int t = 0; t < 24; ++t) {
      PhasePoint x = origin;
      double rho2 = 0;
      for (int i = 0; i < m.d; ++i) {
        x.q[i] = -1 + 2 * next_unit(rng);
        x.p[i] = -0.5 + next_unit(rng);
        rho2 += x.p[i] * x.p[i];
      }
      if (std::abs(eval(m.f, x) - (c + k * rho2)) > 1e-10 * (1 + std::abs(c))) return std::nullopt;
    }
    return std::make_pair(c, k);
  } catch (const EvalError&) {
    return std::nullopt;
  }
}

}  // namespace

NondegeneracyReport nondegeneracy_report(const GupModel& m, const Box& box, int n,
                                         std::uint64_t seed) {
  NondegeneracyReport rep;
  auto pts = sample_box(box, m.d, n, seed, m.params);
  bool first = true;
  for (const auto& x : pts) {
    double fv = eval(m.f, x);
    if (first || fv < rep.min_f) {
      rep.min_f = fv;
      rep.argmin = x;
      first = false;
    }
  }
  rep.pass = !first && rep.min_f > 0;
  if (auto fit = radial_quadratic_fit(m)) {
    auto [c, k] = *fit;
    if (k < 0 && c > 0) rep.ball_radius2 = c / -k;
  }
  return rep;
}

}  // namespace gup
