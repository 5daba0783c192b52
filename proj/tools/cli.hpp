#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace superpure::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigInvalid = 2,
  kIoError = 3,
  kBackendError = 4,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace superpure::cli
