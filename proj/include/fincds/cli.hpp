#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace fincds {

/// Entry point shared by the binary, the tests and the bindings.
/// Exit codes: 0 success, 1 usage/parse/other errors, 2 solver-precondition
/// failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fincds
