#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nngs::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kNotFound = 2,
  kInvalidCertificate = 3,
};

// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nngs::cli
