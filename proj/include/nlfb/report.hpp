#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace nlfb {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Outcome of a structural validation. Failures are collected, never thrown.
struct ValidationReport {
  std::vector<Check> checks;

  void add(std::string name, bool passed, std::string detail = {}) {
    checks.push_back({std::move(name), passed, std::move(detail)});
  }

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const Check& c) { return c.passed; });
  }

  const Check* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  void merge(const ValidationReport& other, const std::string& prefix = {}) {
    for (const auto& c : other.checks)
      checks.push_back({prefix + c.name, c.passed, c.detail});
  }
};

}  // namespace nlfb
