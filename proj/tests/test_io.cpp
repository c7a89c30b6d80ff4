#include "gup/model_io.hpp"

#include "gup/closure.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace gup;
using nlohmann::json;

namespace {

json minimal_kmm3d() {
  return json::parse(R"json({
    "name": "kmm3d",
    "dimension": 3,
    "parameters": {"beta": "1/10"},
    "f": "1 + beta*(p1^2 + p2^2 + p3^2)",
    "L": ["2*beta*(q2*p1 - q1*p2)",
          "2*beta*(q3*p1 - q1*p3)",
          "2*beta*(q3*p2 - q2*p3)"]
  })json");
}

}  // namespace

TEST_CASE("bundled models all load and close") {
  namespace fs = std::filesystem;
  int count = 0;
  for (const auto& e : fs::directory_iterator(GUP_MODELS_DIR)) {
    if (e.path().extension() != ".json") continue;
    ++count;
    std::string fname = e.path().filename().string();
    CAPTURE(fname);
    ModelFile mf = load_model_file(e.path().string());
    auto cc = closure::closure_check(mf.model, mf.model.domain, 60, 3);
    CHECK(cc.pass);
  }
  CHECK(count == 9);
}

TEST_CASE("the full document round trips its pieces") {
  auto doc = minimal_kmm3d();
  doc["domain"] = {{"q", {-2, 2}}, {"p", {-0.4, 0.4}}};
  doc["scheme"] = {{"a", "-2*beta*(1 + beta*rho^2)"},
                   {"f", "1 + beta*rho^2"},
                   {"s", {"0", "0", "0"}}};
  doc["hamiltonian"] = "(p1^2 + p2^2 + p3^2)/2";
  doc["quantum"] = {{"ordering", "right"}};

  ModelFile mf = parse_model_json(doc);
  CHECK(mf.model.d == 3);
  CHECK(mf.model.name == "kmm3d");
  CHECK(mf.model.params.at("beta") == 0.1);
  CHECK(mf.model.exact_params.at("beta") == Rational(1, 10));
  CHECK(mf.model.domain.q_lo == -2);
  CHECK(mf.model.domain.p_hi == 0.4);
  REQUIRE(mf.scheme.has_value());
  REQUIRE(mf.hamiltonian.has_value());
  REQUIRE(mf.ordering.has_value());
  CHECK(*mf.ordering == opalg::Ordering::MomentaRight);
}

TEST_CASE("parameters accept numbers and exact strings") {
  auto doc = minimal_kmm3d();
  doc["parameters"] = {{"beta", 0.125}};
  ModelFile mf = parse_model_json(doc);
  CHECK(mf.model.params.at("beta") == 0.125);
  // a plain double is not promoted to an exact value
  CHECK(mf.model.exact_params.count("beta") == 0);

  doc["parameters"] = {{"beta", 1}};
  CHECK(parse_model_json(doc).model.exact_params.at("beta") == 1);

  doc["parameters"] = {{"beta", "not-a-number"}};
  CHECK_THROWS_AS(parse_model_json(doc), SchemaError);
}

TEST_CASE("schema violations are rejected") {
  CHECK_THROWS_AS(parse_model_json(json::array()), SchemaError);

  auto doc = minimal_kmm3d();
  doc.erase("f");
  CHECK_THROWS_AS(parse_model_json(doc), SchemaError);

  doc = minimal_kmm3d();
  doc["surprise"] = 1;  // unknown keys are refused, not ignored
  CHECK_THROWS_AS(parse_model_json(doc), SchemaError);

  doc = minimal_kmm3d();
  doc["L"] = {"0"};  // wrong triangle size for d = 3
  CHECK_THROWS_AS(parse_model_json(doc), SchemaError);

  doc = minimal_kmm3d();
  doc["f"] = "1 +";
  CHECK_THROWS_AS(parse_model_json(doc), SchemaError);

  doc = minimal_kmm3d();
  doc["hamiltonian"] = "q1 + q7";  // coordinate outside the dimension
  CHECK_THROWS_AS(parse_model_json(doc), SchemaError);

  // scheme blocks demand a three-dimensional model
  json doc2 = {{"name", "m"}, {"dimension", 2}, {"f", "1"}, {"L", {"0"}},
               {"scheme", {{"a", "0"}, {"f", "1"}}}};
  CHECK_THROWS_AS(parse_model_json(doc2), SchemaError);
}

TEST_CASE("a scheme must reproduce the model it annotates") {
  auto doc = minimal_kmm3d();
  doc["scheme"] = {{"a", "-1"}, {"f", "sqrt(1 + rho^2)"}};  // wrong profile family
  CHECK_THROWS_AS(parse_model_json(doc), SchemaError);
}

TEST_CASE("scheme f can be derived from a alone") {
  auto doc = minimal_kmm3d();
  doc["scheme"] = {{"a", "-2*beta*(1 + beta*rho^2)"}};
  ModelFile mf = parse_model_json(doc);
  REQUIRE(mf.scheme.has_value());
  // the quadrature must reproduce the quadratic profile
  PhasePoint x{{0, 0, 0}, {0.3, -0.2, 0.1}, {{"beta", 0.1}}};
  double rho2 = 0.09 + 0.04 + 0.01;
  CHECK(eval(mf.scheme->f_p, x) == doctest::Approx(1 + 0.1 * rho2).epsilon(1e-9));
}

TEST_CASE("load_model_file reports the path on failure") {
  namespace fs = std::filesystem;
  auto tmp = fs::temp_directory_path() / "gup-io-test-broken.json";
  std::ofstream(tmp) << "{ not json";
  try {
    load_model_file(tmp.string());
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find(tmp.filename().string()) != std::string::npos);
  }
  fs::remove(tmp);
  CHECK_THROWS_AS(load_model_file((tmp.parent_path() / "gup-io-missing.json").string()),
                  SchemaError);
}

TEST_CASE("model hash is stable, canonical and sensitive") {
  auto a = parse_model_json(minimal_kmm3d());
  auto b = parse_model_json(minimal_kmm3d());
  CHECK(model_hash(a.model) == model_hash(b.model));
  CHECK(model_hash_hex(a.model).size() == 16);

  auto doc = minimal_kmm3d();
  doc["parameters"]["beta"] = "1/9";
  CHECK(model_hash(parse_model_json(doc).model) != model_hash(a.model));

  doc = minimal_kmm3d();
  doc["name"] = "other";
  CHECK(model_hash(parse_model_json(doc).model) != model_hash(a.model));
}

TEST_CASE("reports serialize with a fixed key order") {
  auto mf = parse_model_json(minimal_kmm3d());
  auto cc = closure::closure_check(mf.model, mf.model.domain, 40, 11);
  auto j1 = report_to_json(cc.report, mf.model);
  auto j2 = report_to_json(cc.report, mf.model);
  CHECK(j1.dump() == j2.dump());
  CHECK(j1.contains("version"));
  CHECK(j1.contains("model_hash"));
  CHECK(j1["checks"].is_array());
  // key order is part of the contract: equal inputs, equal bytes
  std::string dumped = j1.dump();
  CHECK(dumped.find("\"version\"") < dumped.find("\"model\""));
  CHECK(dumped.find("\"model\"") < dumped.find("\"checks\""));
}
