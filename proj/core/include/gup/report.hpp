#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gup {

struct Box {
  double q_lo = -1.0, q_hi = 1.0;
  double p_lo = -0.5, p_hi = 0.5;
};

struct CheckItem {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string note;
};

struct CheckReport {
  std::string model_name;
  std::uint64_t seed = 0;
  int n_points = 0;
  Box region;
  std::vector<CheckItem> items;

  bool passed() const {
    for (const auto& it : items)
      if (!it.pass) return false;
    return true;
  }
  void add(std::string name, double residual, double tol, std::string note = "") {
    items.push_back({std::move(name), residual, tol, residual <= tol, std::move(note)});
  }
};

}  // namespace gup
