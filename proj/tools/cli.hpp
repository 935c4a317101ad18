#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace advsim::cli {

/// Exit codes: 0 success, 1 runtime error, 2 usage or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace advsim::cli
