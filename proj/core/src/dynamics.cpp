#include "gup/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace gup {
namespace dynamics {

namespace {

// Differentiated Hamiltonian and model data, built once per integration.
struct Field {
  const GupModel& m;
  std::vector<Expr> dHq, dHp;
  double f_min;
  mutable PhasePoint ctx;  // reused evaluation context carrying the params

  Field(const GupModel& model, const Expr& H, double fmin) : m(model), f_min(fmin) {
    for (int i = 1; i <= m.d; ++i) {
      dHq.push_back(diff(H, {VarKind::Q, i}));
      dHp.push_back(diff(H, {VarKind::P, i}));
    }
    ctx.params = m.params;
    ctx.q.resize(m.d);
    ctx.p.resize(m.d);
  }

  void operator()(const std::vector<double>& y, std::vector<double>& out) const {
    const int d = m.d;
    std::copy(y.begin(), y.begin() + d, ctx.q.begin());
    std::copy(y.begin() + d, y.end(), ctx.p.begin());
    double f = eval(m.f, ctx);
    if (!(f > f_min)) {
      std::ostringstream os;
      os << "f = " << f << " at the guard threshold " << f_min << "; flow left the domain";
      throw DomainExit(os.str());
    }
    std::vector<double> hq(d), hp(d);
    for (int i = 0; i < d; ++i) {
      hq[i] = eval(dHq[i], ctx);
      hp[i] = eval(dHp[i], ctx);
    }
    out.assign(2 * d, 0.0);
    for (int i = 1; i <= d; ++i) {
      double qdot = f * hp[i - 1];
      for (int j = 1; j <= d; ++j) {
        if (j == i) continue;
        qdot += eval(m.L_at(i, j), ctx) * hq[j - 1];
      }
      out[i - 1] = qdot;
      out[d + i - 1] = -f * hq[i - 1];
    }
  }
};

std::vector<double> pack(const PhasePoint& x) {
  std::vector<double> y(x.q);
  y.insert(y.end(), x.p.begin(), x.p.end());
  return y;
}

PhasePoint unpack(const std::vector<double>& y, int d) {
  PhasePoint x;
  x.q.assign(y.begin(), y.begin() + d);
  x.p.assign(y.begin() + d, y.end());
  return x;
}

void axpy(std::vector<double>& out, const std::vector<double>& x, double a,
          const std::vector<double>& k) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + a * k[i];
}

void rk4_step(const Field& F, std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  F(y, k1);
  axpy(tmp, y, h / 2, k1);
  F(tmp, k2);
  axpy(tmp, y, h / 2, k2);
  F(tmp, k3);
  axpy(tmp, y, h, k3);
  F(tmp, k4);
  for (std::size_t i = 0; i < n; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
}

// Dormand-Prince 5(4) tableau
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,      0.0,           500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84,     0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,           7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

// One adaptive attempt; returns the error measure and the candidate state.
double dopri_attempt(const Field& F, const std::vector<double>& y, double h,
                     std::vector<double>& y5, double rtol, double atol,
                     std::vector<double> k[7]) {
  const std::size_t n = y.size();
  std::vector<double> tmp(n);
  F(y, k[0]);
  for (int s = 1; s < 7; ++s) {
    tmp = y;
    for (int j = 0; j < s; ++j)
      if (kA[s][j] != 0.0)
        for (std::size_t i = 0; i < n; ++i) tmp[i] += h * kA[s][j] * k[j][i];
    F(tmp, k[s]);
  }
  y5 = y;
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d5 = 0.0, d4 = 0.0;
    for (int s = 0; s < 7; ++s) {
      d5 += kB5[s] * k[s][i];
      d4 += kB4[s] * k[s][i];
    }
    y5[i] += h * d5;
    double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
    err = std::max(err, std::abs(h * (d5 - d4)) / scale);
  }
  return err;
}

}  // namespace

std::vector<double> hamiltonian_vector_field(const GupModel& m, const Expr& H,
                                             const PhasePoint& x) {
  Field F(m, H, 0.0);
  std::vector<double> out;
  F(pack(with_params(m, x)), out);
  return out;
}

Trajectory integrate(const GupModel& m, const Expr& H, const PhasePoint& x0, double t_end,
                     const IntegrateOptions& opts) {
  if (static_cast<int>(x0.q.size()) != m.d || static_cast<int>(x0.p.size()) != m.d)
    throw DynamicsError("initial point does not match the model dimension");
  if (!(opts.dt > 0)) throw DynamicsError("step size must be positive");
  if (!(t_end >= 0)) throw DynamicsError("t_end must be nonnegative");

  Field F(m, H, opts.f_min);
  Trajectory tr;
  tr.method = opts.method;
  tr.dt = opts.dt;

  std::vector<double> y = pack(x0);
  {
    // reject an initial point already outside the domain
    std::vector<double> probe;
    F(y, probe);
  }
  double t = 0.0;
  tr.t.push_back(t);
  tr.x.push_back(unpack(y, m.d));

  const double eps = 1e-12 * std::max(1.0, t_end);

  if (opts.method == Method::RK4) {
    while (t < t_end - eps) {
      double h = std::min(opts.dt, t_end - t);
      rk4_step(F, y, h);
      t += h;
      tr.t.push_back(t);
      tr.x.push_back(unpack(y, m.d));
    }
    return tr;
  }

  std::vector<double> k[7];
  double h = std::min(opts.dt, t_end > 0 ? t_end : opts.dt);
  while (t < t_end - eps) {
    h = std::min(h, t_end - t);
    std::vector<double> y5;
    double err = dopri_attempt(F, y, h, y5, opts.rtol, opts.atol, k);
    if (err <= 1.0) {
      y = std::move(y5);
      t += h;
      tr.t.push_back(t);
      tr.x.push_back(unpack(y, m.d));
    }
    double factor = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
    if (!(h > 1e-14)) throw DynamicsError("adaptive step collapsed below 1e-14");
  }
  return tr;
}

ConservationReport conservation_report(const Trajectory& tr, const GupModel& m, const Expr& H,
                                       const angular::AngularScheme* scheme) {
  if (tr.x.empty()) throw DynamicsError("empty trajectory");
  ConservationReport rep;
  double h0 = eval(H, with_params(m, tr.x.front()));
  for (const auto& pt : tr.x)
    rep.energy_drift = std::max(rep.energy_drift, std::abs(eval(H, with_params(m, pt)) - h0));
  if (scheme) {
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
      double j0 = eval(scheme->J[k], with_params(scheme->model, tr.x.front()));
      for (const auto& pt : tr.x)
        worst = std::max(worst,
                         std::abs(eval(scheme->J[k], with_params(scheme->model, pt)) - j0));
    }
    rep.j_drift = worst;
  }
  return rep;
}

double liouville_residual(const GupModel& m, const Expr& H, const std::vector<PhasePoint>& pts) {
  Expr w = pow(m.f, -m.d);
  Expr div = constant(0);
  for (int i = 1; i <= m.d; ++i) {
    Expr xq = mul(m.f, diff(H, {VarKind::P, i}));
    for (int j = 1; j <= m.d; ++j) {
      if (j == i) continue;
      xq = add(xq, mul(m.L_at(i, j), diff(H, {VarKind::Q, j})));
    }
    Expr xp = neg(mul(m.f, diff(H, {VarKind::Q, i})));
    div = add(div, diff(mul(w, xq), {VarKind::Q, i}));
    div = add(div, diff(mul(w, xp), {VarKind::P, i}));
  }
  div = simplify(div);
  double worst = 0.0;
  for (const auto& x : pts) worst = std::max(worst, std::abs(eval(div, with_params(m, x))));
  return worst;
}

void write_csv(std::ostream& os, const Trajectory& tr, const GupModel& m, const Expr& H,
               const angular::AngularScheme* scheme) {
  os << "t";
  for (int i = 1; i <= m.d; ++i) os << ",q" << i;
  for (int i = 1; i <= m.d; ++i) os << ",p" << i;
  os << ",H";
  if (scheme) os << ",J1,J2,J3";
  os << "\n";
  os << std::setprecision(17);
  for (std::size_t n = 0; n < tr.t.size(); ++n) {
    PhasePoint ctx = with_params(m, tr.x[n]);
    os << tr.t[n];
    for (double v : tr.x[n].q) os << "," << v;
    for (double v : tr.x[n].p) os << "," << v;
    os << "," << eval(H, ctx);
    if (scheme)
      for (int k = 0; k < 3; ++k)
        os << "," << eval(scheme->J[k], with_params(scheme->model, tr.x[n]));
    os << "\n";
  }
}

}  // namespace dynamics
}  // namespace gup
