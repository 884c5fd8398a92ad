#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qflqg/offline.hpp"

namespace qflqg {

struct VerifyOptions {
  std::uint64_t seed = 1;
  int whiteness_trials = 4000;
  int trajectories = 20;  // incremental vs batch replays
  int moment_samples = 40000;
  long long max_sequences = 1000000;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Runs the oracle checks against a built design. Checks that cannot run
// (for example brute force above the sequence cap) are reported as failed
// with the reason in `detail`.
std::vector<CheckResult> run_verification(const OfflineDesign& design,
                                          const VerifyOptions& options = {});

}  // namespace qflqg
