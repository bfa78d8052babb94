#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace repset::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericFailure = 3,
};

/// Runs one `repset` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace repset::cli
