#include "gup/model_io.hpp"

#include "gup/solver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace gup {

namespace {

void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key))
      throw SchemaError(where + ": unknown key '" + key + "'");
  }
}

Expr parse_or_throw(const std::string& text, const std::string& where) {
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// numbers are exact only when integral; strings go through the rational
// parser, so "1/10" stays exact
void read_parameters(const nlohmann::json& j, GupModel& m) {
  for (const auto& [name, value] : j.items()) {
    if (value.is_number_integer()) {
      long long n = value.get<long long>();
      m.params[name] = static_cast<double>(n);
      m.exact_params[name] = Rational(n);
    } else if (value.is_number()) {
      m.params[name] = value.get<double>();
    } else if (value.is_string()) {
      auto r = parse_rational(value.get<std::string>());
      if (!r)
        throw SchemaError("parameters." + name + ": '" + value.get<std::string>() +
                          "' is not a rational number");
      m.params[name] = to_double(*r);
      m.exact_params[name] = *r;
    } else {
      throw SchemaError("parameters." + name + ": expected a number or a rational string");
    }
  }
}

Box read_domain(const nlohmann::json& j) {
  require_keys(j, {"q", "p"}, "domain");
  Box box;
  auto read_pair = [&](const char* key, double& lo, double& hi) {
    if (!j.contains(key)) return;
    const auto& arr = j.at(key);
    if (!arr.is_array() || arr.size() != 2 || !arr[0].is_number() || !arr[1].is_number())
      throw SchemaError(std::string("domain.") + key + ": expected [lo, hi]");
    lo = arr[0].get<double>();
    hi = arr[1].get<double>();
    if (!(lo < hi)) throw SchemaError(std::string("domain.") + key + ": lo must be below hi");
  };
  read_pair("q", box.q_lo, box.q_hi);
  read_pair("p", box.p_lo, box.p_hi);
  return box;
}

void check_expr_symbols(const Expr& e, const GupModel& m, const std::string& where) {
  SymbolSet sym = collect_symbols(e);
  for (const auto& v : sym.vars)
    if (v.index > m.d)
      throw SchemaError(where + ": coordinate " + v.name() + " exceeds dimension " +
                        std::to_string(m.d));
  for (const auto& name : sym.params)
    if (!m.params.count(name)) throw SchemaError(where + ": parameter '" + name + "' not declared");
}

angular::AngularScheme read_scheme(const nlohmann::json& j, const GupModel& m) {
  if (m.d != 3) throw SchemaError("scheme: only three-dimensional models carry a scheme");
  require_keys(j, {"a", "f", "s"}, "scheme");
  if (!j.contains("a") || !j.at("a").is_string())
    throw SchemaError("scheme.a: expected an expression string");
  Expr a = parse_or_throw(j.at("a").get<std::string>(), "scheme.a");

  Expr f_rho;
  if (j.contains("f")) {
    if (!j.at("f").is_string()) throw SchemaError("scheme.f: expected an expression string");
    f_rho = parse_or_throw(j.at("f").get<std::string>(), "scheme.f");
  } else {
    // reconstruct the radial profile from a, anchored at the model's f(0)
    std::map<std::string, Expr> to_zero;
    for (int i = 1; i <= m.d; ++i) {
      to_zero.emplace("q" + std::to_string(i), constant(0));
      to_zero.emplace("p" + std::to_string(i), constant(0));
    }
    Expr f0 = simplify(substitute(m.f, to_zero));
    if (f0->kind != ExprKind::Const)
      throw SchemaError("scheme: cannot anchor the radial profile; give scheme.f explicitly");
    solver::RadialF rf = solver::solve_f_radial(a, f0->value, m.params);
    if (!rf.closed_form)
      throw SchemaError("scheme: no closed radial profile for this a; give scheme.f explicitly");
    f_rho = *rf.closed_form;
  }

  std::array<Expr, 3> s{constant(0), constant(0), constant(0)};
  bool has_s = false;
  if (j.contains("s")) {
    const auto& arr = j.at("s");
    if (!arr.is_array() || arr.size() != 3)
      throw SchemaError("scheme.s: expected three expression strings");
    for (int k = 0; k < 3; ++k) {
      if (!arr[k].is_string()) throw SchemaError("scheme.s: expected three expression strings");
      s[k] = parse_or_throw(arr[k].get<std::string>(), "scheme.s");
    }
    has_s = true;
  }

  angular::AngularScheme sch;
  try {
    sch = angular::build_scheme(a, f_rho, m.params, has_s ? &s : nullptr);
  } catch (const angular::AngularError& e) {
    throw SchemaError(std::string("scheme: ") + e.what());
  }

  // the scheme must reproduce the model's own structure functions
  auto pts = sample_box(m, 24, 0xACCE55u);
  double worst = 0.0;
  for (const auto& x : pts) {
    PhasePoint ctx = with_params(m, x);
    worst = std::max(worst, std::abs(eval(sch.model.f, ctx) - eval(m.f, ctx)));
    for (int i = 1; i <= 3; ++i)
      for (int k = i + 1; k <= 3; ++k)
        worst = std::max(worst,
                         std::abs(eval(sch.model.L_at(i, k), ctx) - eval(m.L_at(i, k), ctx)));
  }
  if (worst > 1e-9) {
    std::ostringstream os;
    os << "scheme: induced structure deviates from the model's f and L by " << worst;
    throw SchemaError(os.str());
  }
  return sch;
}

}  // namespace

ModelFile parse_model_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("model document must be a JSON object");
  require_keys(j,
               {"name", "dimension", "parameters", "f", "L", "domain", "scheme", "hamiltonian",
                "quantum"},
               "model");

  std::string name;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw SchemaError("name: expected a string");
    name = j.at("name").get<std::string>();
  }
  if (!j.contains("dimension") || !j.at("dimension").is_number_integer())
    throw SchemaError("dimension: expected an integer");
  int d = j.at("dimension").get<int>();
  if (d < 1) throw SchemaError("dimension: must be positive");

  GupModel proto;
  if (j.contains("parameters")) {
    if (!j.at("parameters").is_object()) throw SchemaError("parameters: expected an object");
    read_parameters(j.at("parameters"), proto);
  }

  if (!j.contains("f") || !j.at("f").is_string())
    throw SchemaError("f: expected an expression string");
  Expr f = parse_or_throw(j.at("f").get<std::string>(), "f");

  std::vector<Expr> L;
  if (j.contains("L")) {
    if (!j.at("L").is_array()) throw SchemaError("L: expected an array of expression strings");
    int idx = 0;
    for (const auto& entry : j.at("L")) {
      if (!entry.is_string()) throw SchemaError("L: expected an array of expression strings");
      L.push_back(parse_or_throw(entry.get<std::string>(), "L[" + std::to_string(idx) + "]"));
      ++idx;
    }
  }

  Box domain;
  if (j.contains("domain")) {
    if (!j.at("domain").is_object()) throw SchemaError("domain: expected an object");
    domain = read_domain(j.at("domain"));
  }

  ModelFile mf;
  try {
    mf.model = make_model(d, f, std::move(L), proto.params, name, domain);
  } catch (const ModelError& e) {
    throw SchemaError(e.what());
  }
  mf.model.exact_params = std::move(proto.exact_params);

  if (j.contains("hamiltonian")) {
    if (!j.at("hamiltonian").is_string())
      throw SchemaError("hamiltonian: expected an expression string");
    Expr H = parse_or_throw(j.at("hamiltonian").get<std::string>(), "hamiltonian");
    check_expr_symbols(H, mf.model, "hamiltonian");
    mf.hamiltonian = H;
  }

  if (j.contains("scheme")) {
    if (!j.at("scheme").is_object()) throw SchemaError("scheme: expected an object");
    mf.scheme = read_scheme(j.at("scheme"), mf.model);
  }

  if (j.contains("quantum")) {
    const auto& q = j.at("quantum");
    if (!q.is_object()) throw SchemaError("quantum: expected an object");
    require_keys(q, {"ordering"}, "quantum");
    if (!q.contains("ordering") || !q.at("ordering").is_string())
      throw SchemaError("quantum.ordering: expected \"left\" or \"right\"");
    std::string ord = q.at("ordering").get<std::string>();
    if (ord == "left")
      mf.ordering = opalg::Ordering::MomentaLeft;
    else if (ord == "right")
      mf.ordering = opalg::Ordering::MomentaRight;
    else
      throw SchemaError("quantum.ordering: expected \"left\" or \"right\"");
  }

  return mf;
}

ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
  try {
    return parse_model_json(j);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

std::uint64_t model_hash(const GupModel& m) {
  std::ostringstream os;
  os << "gup-model\n" << m.name << "\n" << m.d << "\n" << to_string(m.f) << "\n";
  for (const auto& l : m.L) os << to_string(l) << "\n";
  for (const auto& [name, value] : m.params) {
    auto it = m.exact_params.find(name);
    os << name << "=";
    if (it != m.exact_params.end())
      os << rational_to_string(it->second);
    else
      os << fmt_double(value);
    os << "\n";
  }
  os << fmt_double(m.domain.q_lo) << " " << fmt_double(m.domain.q_hi) << " "
     << fmt_double(m.domain.p_lo) << " " << fmt_double(m.domain.p_hi) << "\n";

  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string model_hash_hex(const GupModel& m) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(model_hash(m)));
  return buf;
}

nlohmann::ordered_json report_to_json(const CheckReport& rep, const GupModel& m) {
  nlohmann::ordered_json out;
  out["version"] = kVersion;
  out["model"] = rep.model_name;
  out["model_hash"] = model_hash_hex(m);
  out["seed"] = rep.seed;
  out["points"] = rep.n_points;
  out["region"] = {{"q", {rep.region.q_lo, rep.region.q_hi}},
                   {"p", {rep.region.p_lo, rep.region.p_hi}}};
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& item : rep.items) {
    nlohmann::ordered_json c;
    c["name"] = item.name;
    c["residual"] = item.residual;
    c["tolerance"] = item.tol;
    c["pass"] = item.pass;
    if (!item.note.empty()) c["note"] = item.note;
    checks.push_back(std::move(c));
  }
  out["checks"] = std::move(checks);
  out["pass"] = rep.passed();
  return out;
}

}  // namespace gup
