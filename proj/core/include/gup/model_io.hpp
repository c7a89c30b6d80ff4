#pragma once

#include "gup/angular.hpp"
#include "gup/model.hpp"
#include "gup/opalg.hpp"
#include "gup/report.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace gup {

inline constexpr const char* kVersion = "0.1.0";

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// On-disk model document:
//   {
//     "name": "kmm3d",
//     "dimension": 3,
//     "parameters": {"beta": "1/10"},        // number, or string rational
//     "f": "1 + beta*(p1^2+p2^2+p3^2)",
//     "L": ["...", "...", "..."],            // upper triangle, row-major
//     "domain": {"q": [-1, 1], "p": [-0.5, 0.5]},
//     "scheme": {"a": "-2*beta*(1+beta*rho^2)",
//                "f": "1+beta*rho^2",        // optional; derived from a if absent
//                "s": ["0", "0", "0"]},      // optional, defaults to zero
//     "hamiltonian": "(p1^2+p2^2+p3^2)/2",   // optional
//     "quantum": {"ordering": "left"}        // optional
//   }
// A scheme block is only valid on three-dimensional models and must reproduce
// the model's f and L; the loader verifies this on a fixed sample.
struct ModelFile {
  GupModel model;
  std::optional<angular::AngularScheme> scheme;
  std::optional<Expr> hamiltonian;
  std::optional<opalg::Ordering> ordering;
};

ModelFile parse_model_json(const nlohmann::json& j);
ModelFile load_model_file(const std::string& path);

// FNV-1a 64 over the canonical serialization of the model data; stable across
// runs and platforms.
std::uint64_t model_hash(const GupModel& m);
std::string model_hash_hex(const GupModel& m);

// Check report rendered with a fixed key order so equal inputs give equal
// bytes.
nlohmann::ordered_json report_to_json(const CheckReport& rep, const GupModel& m);

}  // namespace gup
