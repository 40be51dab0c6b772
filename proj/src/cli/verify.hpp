#pragma once

#include <string>
#include <vector>

#include "cli/config_io.hpp"

namespace gaplab::cli {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Self-test against hand-computed values and exact invariants. The config
/// supplies the seed for the randomized invariant checks.
std::vector<VerifyCheck> run_verify_suite(const RunConfig& cfg);

}  // namespace gaplab::cli
