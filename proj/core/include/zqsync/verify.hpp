#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace zqsync {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Cross-checks between independent code paths and exact invariants.
/// full = false keeps every check under a few seconds.
std::vector<CheckResult> run_invariant_suite(bool full, int jobs, std::uint64_t seed, std::ostream& log);

}  // namespace zqsync
