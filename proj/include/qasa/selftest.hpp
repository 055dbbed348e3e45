#pragma once

#include <string>
#include <vector>

namespace qasa::selftest {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

struct SelftestOptions {
  bool inject_ry_sign_flip = false;  // simulate a broken RY matrix to prove the gate suite notices
};

/// Gate-oracle, gradient, attention and metric suites, in that order.
std::vector<SuiteResult> run_selftest(const SelftestOptions& options = {});

}  // namespace qasa::selftest
