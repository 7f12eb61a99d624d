#pragma once

#include <string>
#include <vector>

namespace ladder {

/// Exit codes: 0 success, 2 config error, 3 infeasible design,
/// 4 numerical non-convergence, 1 anything else.
int run_cli(const std::vector<std::string>& args);

}  // namespace ladder
