#pragma once

// Batch front-end shared by the `focal` executable and the tests.
// Exit codes: 0 success, 1 configuration error, 2 counterexample or failed check.

#include <iosfwd>
#include <string>
#include <vector>

namespace focal {

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace focal
