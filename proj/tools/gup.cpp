// gup: structure checks, deformation solvers, flow integration and operator
// algebra verification for deformed phase-space models.
//
// Exit codes: 0 success, 1 check or run failure, 2 usage/schema error,
// 3 model outside the operator-algebra restriction (non-polynomial data).

#include "gup/closure.hpp"
#include "gup/dynamics.hpp"
#include "gup/model_io.hpp"
#include "gup/opalg.hpp"
#include "gup/solver.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kRestriction = 3;

std::uint64_t effective_seed(std::uint64_t flag_seed) {
  // the environment wins so batch wrappers can pin every invocation at once
  if (const char* env = std::getenv("GUP_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw gup::SchemaError("GUP_SEED is not an unsigned integer");
    }
  }
  return flag_seed;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(piece, &used));
      while (used < piece.size() && std::isspace(static_cast<unsigned char>(piece[used]))) ++used;
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (...) {
      throw gup::SchemaError(what + ": '" + piece + "' is not a number");
    }
  }
  if (out.empty()) throw gup::SchemaError(what + ": empty list");
  return out;
}

gup::Expr parse_expr_arg(const std::string& text, const std::string& what) {
  try {
    return gup::parse(text);
  } catch (const gup::ParseError& e) {
    throw gup::SchemaError(what + ": " + e.what());
  }
}

struct ParamArgs {
  std::map<std::string, double> values;
  std::map<std::string, gup::Rational> exact;
  std::vector<std::string> names;
};

ParamArgs parse_param_args(const std::vector<std::string>& raw) {
  ParamArgs out;
  for (const auto& item : raw) {
    auto pos = item.find('=');
    if (pos == std::string::npos || pos == 0)
      throw gup::SchemaError("--param expects name=value, got '" + item + "'");
    std::string name = item.substr(0, pos);
    std::string value = item.substr(pos + 1);
    auto r = gup::parse_rational(value);
    if (r) {
      out.values[name] = gup::to_double(*r);
      out.exact[name] = *r;
    } else {
      try {
        out.values[name] = std::stod(value);
      } catch (...) {
        throw gup::SchemaError("--param " + name + ": '" + value + "' is not a number");
      }
    }
    out.names.push_back(name);
  }
  return out;
}

void emit_report(const nlohmann::ordered_json& doc, const std::string& out_path) {
  std::string text = doc.dump(2) + "\n";
  std::cout << text;
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw gup::SchemaError(out_path + ": cannot open for writing");
    out << text;
  }
}

// ---------------------------------------------------------------------- check

struct CheckArgs {
  std::string model_path;
  int points = 100;
  std::uint64_t seed = 12345;
  double tol = 1e-9;
  std::string out_path;
};

int cmd_check(const CheckArgs& args) {
  gup::ModelFile mf = gup::load_model_file(args.model_path);
  const gup::GupModel& m = mf.model;
  std::uint64_t seed = effective_seed(args.seed);

  gup::CheckReport rep;
  rep.model_name = m.name;
  rep.seed = seed;
  rep.n_points = args.points;
  rep.region = m.domain;

  auto nd = gup::nondegeneracy_report(m, m.domain, args.points, seed);
  {
    std::ostringstream note;
    note << "minimum of f over the sample; must stay positive";
    if (nd.ball_radius2)
      note << " (radial profile positive inside rho^2 < " << *nd.ball_radius2 << ")";
    rep.items.push_back({"nondegeneracy", nd.min_f, 0.0, nd.pass, note.str()});
  }

  auto pts = gup::sample_box(m, args.points, seed);
  double inv = 0.0, det_pi = 0.0, det_om = 0.0;
  for (const auto& x : pts) {
    gup::PhasePoint ctx = gup::with_params(m, x);
    gup::Mat pi = gup::poisson_matrix(m, ctx);
    gup::Mat om = gup::symplectic_matrix(m, ctx);
    inv = std::max(inv, gup::max_abs_identity_diff(gup::matmul(pi, om)));
    double f = gup::eval(m.f, ctx);
    det_pi = std::max(det_pi, std::abs(gup::determinant(pi) - std::pow(f, 2 * m.d)));
    det_om = std::max(det_om, std::abs(gup::determinant(om) - std::pow(f, -2 * m.d)));
  }
  rep.add("matrix-inverse", inv, 1e-10, "max |pi.omega - 1| over the sample");
  rep.add("poisson-determinant", det_pi, 1e-10, "det pi against f^(2d)");
  rep.add("symplectic-determinant", det_om, 1e-10, "det omega against f^(-2d)");

  auto cc = gup::closure::closure_check(m, m.domain, args.points, seed, args.tol);
  for (const auto& item : cc.report.items) rep.items.push_back(item);

  if (mf.scheme) {
    const auto& sch = *mf.scheme;
    auto ar = gup::angular::check_angular_algebra(sch, pts, args.tol);
    rep.add("angular-q", ar.q_family, args.tol, "{J_i, q_j} against the so(3) action");
    rep.add("angular-p", ar.p_family, args.tol, "{J_i, p_j} against the so(3) action");
    rep.add("angular-JJ", ar.jj_family, args.tol, "{J_i, J_j} against the generators");
    bool zero_shift = true;
    for (const auto& s : sch.s)
      if (!gup::structural_equal(gup::simplify(s), gup::constant(0))) zero_shift = false;
    if (zero_shift) {
      double pj = 0.0;
      for (const auto& x : pts) pj = std::max(pj, std::abs(gup::angular::p_dot_J(sch, x)));
      rep.add("p-dot-J", pj, 1e-12, "transversality of the generators");
    }
    rep.add("shift-system", gup::angular::shift_system_residual(sch, pts), args.tol,
            "constraint system tying the shifts to a and f");
  }

  emit_report(gup::report_to_json(rep, m), args.out_path);
  return rep.passed() ? kOk : kFail;
}

// -------------------------------------------------------------------- solve-f

struct SolveFArgs {
  std::string model_path;
  std::string g_arg, a_arg, l_arg;
  std::string c_arg = "1";
  std::string target_arg;
  double target_rho = std::numeric_limits<double>::quiet_NaN();
  bool closed_form = false;
  std::vector<std::string> params;
  int points = 100;
  std::uint64_t seed = 12345;
  double tol = 1e-10;
};

int cmd_solve_f(const SolveFArgs& args) {
  std::cout.precision(15);
  int modes = (!args.model_path.empty()) + (!args.g_arg.empty()) + (!args.a_arg.empty()) +
              (!args.l_arg.empty());
  if (modes != 1)
    throw gup::SchemaError("give exactly one of MODEL, --g, --a, --l");

  auto c_rat = gup::parse_rational(args.c_arg);
  if (!c_rat) throw gup::SchemaError("--c: '" + args.c_arg + "' is not a rational number");
  ParamArgs params = parse_param_args(args.params);
  std::uint64_t seed = effective_seed(args.seed);

  // radial mode
  if (!args.a_arg.empty()) {
    gup::Expr a = parse_expr_arg(args.a_arg, "--a");
    auto rf = gup::solver::solve_f_radial(a, *c_rat, params.values);
    if (args.closed_form) {
      if (rf.closed_form)
        std::cout << "f = " << gup::to_string(*rf.closed_form) << "\n";
      else
        std::cout << "f = sqrt(" << gup::to_double(*c_rat)
                  << " - 2*integral(a(r)*r, r=0..rho))  [no closed form]\n";
    }
    if (!std::isnan(args.target_rho))
      std::cout << "f(" << args.target_rho << ") = " << rf(args.target_rho) << "\n";
    return kOk;
  }

  // 2D polynomial mode
  if (!args.l_arg.empty()) {
    gup::Expr l = parse_expr_arg(args.l_arg, "--l");
    auto p2 = gup::solver::Poly2D::from_expr(l, params.names);
    gup::Expr f = gup::solver::solve_f_polynomial_2d(p2, *c_rat);
    std::cout << "f = " << gup::to_string(f) << "\n";
    if (!args.target_arg.empty()) {
      auto target = parse_number_list(args.target_arg, "--target");
      if (target.size() != 2) throw gup::SchemaError("--target: expected two momenta");
      gup::PhasePoint x;
      x.q = {0, 0};
      x.p = target;
      x.params = params.values;
      std::cout << "f(" << target[0] << ", " << target[1] << ") = " << gup::eval(f, x) << "\n";
    }
    return kOk;
  }

  // line-integral mode, either from explicit g or from a model's L
  std::vector<gup::Expr> g;
  std::map<std::string, double> values = params.values;
  if (!args.g_arg.empty()) {
    std::stringstream ss(args.g_arg);
    std::string piece;
    while (std::getline(ss, piece, ',')) g.push_back(parse_expr_arg(piece, "--g"));
  } else {
    gup::ModelFile mf = gup::load_model_file(args.model_path);
    auto dec = gup::closure::decompose_L(mf.model);
    if (!dec.conforming) {
      std::cerr << "gup: L does not decompose: " << dec.reason << "\n";
      return kFail;
    }
    g = dec.g;
    values = mf.model.params;
  }
  int d = static_cast<int>(g.size());

  auto pts = gup::sample_box(gup::Box{}, d, args.points, seed, values);
  auto integ = gup::solver::check_integrability(g, pts, args.tol);
  if (!integ.ok) {
    std::cerr << "gup: g is not integrable (curl residual " << integ.residual << ")\n";
    return kFail;
  }

  if (args.target_arg.empty()) throw gup::SchemaError("--target is required in this mode");
  auto target = parse_number_list(args.target_arg, "--target");
  if (static_cast<int>(target.size()) != d)
    throw gup::SchemaError("--target: expected " + std::to_string(d) + " momenta");
  double value = gup::solver::solve_f_line_integral(g, values, target, gup::to_double(*c_rat));
  std::cout << "f(";
  for (std::size_t i = 0; i < target.size(); ++i) std::cout << (i ? ", " : "") << target[i];
  std::cout << ") = " << value << "\n";
  return kOk;
}

// ------------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string model_path;
  std::string h_arg, x0_arg, csv_path;
  double t_end = 10.0;
  double dt = 1e-3;
  std::string method = "rk4";
  bool force = false;
  int points = 100;
  std::uint64_t seed = 12345;
  double tol = 1e-9;
};

int cmd_simulate(const SimulateArgs& args) {
  gup::ModelFile mf = gup::load_model_file(args.model_path);
  const gup::GupModel& m = mf.model;
  std::uint64_t seed = effective_seed(args.seed);

  gup::Expr H;
  if (!args.h_arg.empty())
    H = parse_expr_arg(args.h_arg, "--h");
  else if (mf.hamiltonian)
    H = *mf.hamiltonian;
  else
    throw gup::SchemaError("no hamiltonian: give --h or add one to the model file");

  gup::PhasePoint x0;
  if (!args.x0_arg.empty()) {
    auto flat = parse_number_list(args.x0_arg, "--x0");
    if (static_cast<int>(flat.size()) != 2 * m.d)
      throw gup::SchemaError("--x0: expected " + std::to_string(2 * m.d) +
                             " values (q1..qd, p1..pd)");
    x0.q.assign(flat.begin(), flat.begin() + m.d);
    x0.p.assign(flat.begin() + m.d, flat.end());
  } else {
    x0.q.assign(m.d, 0.0);
    x0.p.assign(m.d, 0.3);
  }

  if (!args.force) {
    auto cc = gup::closure::closure_check(m, m.domain, args.points, seed, args.tol);
    auto nd = gup::nondegeneracy_report(m, m.domain, args.points, seed);
    if (!cc.pass || !nd.pass) {
      std::cerr << "gup: model fails its structure checks; rerun with --force to integrate "
                   "anyway\n";
      return kFail;
    }
  }

  gup::dynamics::IntegrateOptions opts;
  opts.dt = args.dt;
  opts.method = args.method == "rk45" ? gup::dynamics::Method::RK45 : gup::dynamics::Method::RK4;

  gup::dynamics::Trajectory tr;
  try {
    tr = gup::dynamics::integrate(m, H, x0, args.t_end, opts);
  } catch (const gup::dynamics::DomainExit& e) {
    std::cerr << "gup: " << e.what() << "\n";
    return kFail;
  }

  const gup::angular::AngularScheme* scheme = mf.scheme ? &*mf.scheme : nullptr;
  auto cons = gup::dynamics::conservation_report(tr, m, H, scheme);

  // reuse the trajectory itself as the divergence sample, thinned to the
  // check budget
  std::vector<gup::PhasePoint> div_pts;
  std::size_t stride = std::max<std::size_t>(1, tr.x.size() / args.points);
  for (std::size_t i = 0; i < tr.x.size(); i += stride) div_pts.push_back(tr.x[i]);
  double liouville = gup::dynamics::liouville_residual(m, H, div_pts);

  if (!args.csv_path.empty()) {
    std::ofstream csv(args.csv_path, std::ios::binary);
    if (!csv) throw gup::SchemaError(args.csv_path + ": cannot open for writing");
    gup::dynamics::write_csv(csv, tr, m, H, scheme);
  }

  nlohmann::ordered_json out;
  out["version"] = gup::kVersion;
  out["model"] = m.name;
  out["model_hash"] = gup::model_hash_hex(m);
  out["method"] = args.method;
  out["dt"] = args.dt;
  out["t_end"] = args.t_end;
  out["steps"] = tr.t.size() - 1;
  out["energy_drift"] = cons.energy_drift;
  if (cons.j_drift) out["j_drift"] = *cons.j_drift;
  out["liouville_residual"] = liouville;
  out["final"] = {{"t", tr.t.back()}, {"q", tr.x.back().q}, {"p", tr.x.back().p}};
  std::cout << out.dump(2) << "\n";
  return kOk;
}

// -------------------------------------------------------------------- quantum

struct QuantumArgs {
  std::string model_path;
  std::string ordering;  // "", "left", "right"
  std::string triples = "all";
};

int cmd_quantum(const QuantumArgs& args) {
  gup::ModelFile mf = gup::load_model_file(args.model_path);
  const gup::GupModel& m = mf.model;

  gup::opalg::Ordering ordering = gup::opalg::Ordering::MomentaLeft;
  if (!args.ordering.empty())
    ordering = args.ordering == "right" ? gup::opalg::Ordering::MomentaRight
                                        : gup::opalg::Ordering::MomentaLeft;
  else if (mf.ordering)
    ordering = *mf.ordering;

  gup::opalg::QuantumModel qm;
  try {
    qm = gup::opalg::quantum_model(m, ordering);
  } catch (const gup::opalg::OpalgError& e) {
    std::cerr << "gup: model is outside the operator-algebra restriction: " << e.what() << "\n";
    return kRestriction;
  }

  auto axis_name = [&](int a) {
    return a < m.d ? "q" + std::to_string(a + 1) : "p" + std::to_string(a - m.d + 1);
  };

  int top = args.triples == "q-only" ? m.d : 2 * m.d;
  nlohmann::ordered_json out;
  out["version"] = gup::kVersion;
  out["model"] = m.name;
  out["model_hash"] = gup::model_hash_hex(m);
  out["ordering"] = ordering == gup::opalg::Ordering::MomentaLeft ? "left" : "right";
  out["triples"] = nlohmann::ordered_json::array();
  bool all_zero = true;
  for (int a = 0; a < top; ++a)
    for (int b = a + 1; b < top; ++b)
      for (int c = b + 1; c < top; ++c) {
        auto res = gup::opalg::quantum_jacobi_residual(qm, a, b, c);
        nlohmann::ordered_json entry;
        entry["triple"] = {axis_name(a), axis_name(b), axis_name(c)};
        entry["zero"] = res.is_zero();
        if (!res.is_zero()) {
          all_zero = false;
          nlohmann::ordered_json grades;
          int hi = res.terms.rbegin()->first.hbar;
          for (int h = res.min_hbar(); h <= hi; ++h) {
            auto part = res.graded_part(h);
            if (!part.is_zero()) grades[std::to_string(h)] = part.to_string();
          }
          entry["grades"] = std::move(grades);
        }
        out["triples"].push_back(std::move(entry));
      }
  out["pass"] = all_zero;
  std::cout << out.dump(2) << "\n";
  return all_zero ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deformed phase-space toolkit"};
  app.require_subcommand(1);

  CheckArgs check_args;
  auto* check = app.add_subcommand("check", "run structure, closure and angular checks");
  check->add_option("model", check_args.model_path, "model JSON file")->required();
  check->add_option("--points", check_args.points, "sample size")->check(CLI::PositiveNumber);
  check->add_option("--seed", check_args.seed, "sampling seed");
  check->add_option("--tol", check_args.tol, "closure/angular tolerance")
      ->check(CLI::PositiveNumber);
  check->add_option("--out", check_args.out_path, "also write the JSON report here");

  SolveFArgs solve_args;
  auto* solve = app.add_subcommand("solve-f", "reconstruct the deformation f");
  solve->add_option("model", solve_args.model_path, "model JSON file (g taken from its L)");
  solve->add_option("--g", solve_args.g_arg, "comma-separated gradient components");
  solve->add_option("--a", solve_args.a_arg, "radial coefficient a(rho)");
  solve->add_option("--l", solve_args.l_arg, "2D generating polynomial l(q1,q2,p1,p2)");
  solve->add_option("--c", solve_args.c_arg, "integration constant f(0)");
  solve->add_option("--target", solve_args.target_arg, "momentum point p1,p2,...");
  solve->add_option("--target-rho", solve_args.target_rho, "momentum radius (radial mode)");
  solve->add_flag("--closed-form", solve_args.closed_form, "print the closed form when one exists");
  solve->add_option("--param", solve_args.params, "parameter binding name=value (repeatable)");
  solve->add_option("--points", solve_args.points, "integrability sample size")
      ->check(CLI::PositiveNumber);
  solve->add_option("--seed", solve_args.seed, "sampling seed");
  solve->add_option("--tol", solve_args.tol, "integrability tolerance")->check(CLI::PositiveNumber);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "integrate the Hamiltonian flow");
  // frees the short -h so the --h observable flag below can exist
  sim->set_help_flag("--help", "print this help message and exit");
  sim->add_option("model", sim_args.model_path, "model JSON file")->required();
  sim->add_option("--h", sim_args.h_arg, "Hamiltonian expression (default: the model's)");
  sim->add_option("--x0", sim_args.x0_arg, "initial state q1..qd,p1..pd");
  sim->add_option("--t-end", sim_args.t_end, "integration horizon")->check(CLI::PositiveNumber);
  sim->add_option("--dt", sim_args.dt, "step size (initial step for rk45)")
      ->check(CLI::PositiveNumber);
  sim->add_option("--method", sim_args.method, "integrator")
      ->check(CLI::IsMember({"rk4", "rk45"}));
  sim->add_option("--csv", sim_args.csv_path, "write the trajectory here");
  sim->add_flag("--force", sim_args.force, "integrate even if the model fails its checks");
  sim->add_option("--points", sim_args.points, "check sample size")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_args.seed, "check sampling seed");
  sim->add_option("--tol", sim_args.tol, "check tolerance")->check(CLI::PositiveNumber);

  QuantumArgs quantum_args;
  auto* quantum = app.add_subcommand("quantum", "verify the operator Jacobi identities");
  quantum->alias("quantum-jacobi");
  quantum->add_option("model", quantum_args.model_path, "model JSON file")->required();
  quantum->add_option("--ordering", quantum_args.ordering, "normal-ordering convention")
      ->check(CLI::IsMember({"left", "right"}));
  quantum->add_option("--triples", quantum_args.triples, "which coordinate triples to test")
      ->check(CLI::IsMember({"all", "q-only"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (check->parsed()) return cmd_check(check_args);
    if (solve->parsed()) return cmd_solve_f(solve_args);
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (quantum->parsed()) return cmd_quantum(quantum_args);
  } catch (const gup::SchemaError& e) {
    std::cerr << "gup: " << e.what() << "\n";
    return kUsage;
  } catch (const gup::solver::SolveError& e) {
    std::cerr << "gup: " << e.what() << "\n";
    return kFail;
  } catch (const gup::dynamics::DynamicsError& e) {
    std::cerr << "gup: " << e.what() << "\n";
    return kFail;
  } catch (const std::exception& e) {
    std::cerr << "gup: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
