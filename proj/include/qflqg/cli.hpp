#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qflqg::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kMissingArtifact = 3,
  kTrialFailure = 4,
  kVerificationFailure = 5,
};

// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace qflqg::cli
