#pragma once

#include <ostream>

namespace ekramers::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kAssumption = 2, kNumerical = 3 };

/// Entry point shared by the executable and the tests. JSON goes to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ekramers::cli
