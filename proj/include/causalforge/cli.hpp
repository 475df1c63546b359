#pragma once

#include <iostream>

namespace causalforge {

/// Entry point of the `causalforge` tool. Returns 0 on success, 1 on a usage
/// error and 2 when the requested work fails.
int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr);

} // namespace causalforge
