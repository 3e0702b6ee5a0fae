#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "brainergm/errors.hpp"

namespace brainergm::app {

/// Exit codes: 0 success, 2 usage, 3 data, 4 non-convergence or degeneracy, 5 internal.
int exit_code(ErrorClass c) noexcept;

/// Runs one `brainergm` invocation. Failures print a single line
/// `error: <class>: <detail>` to `err` and return the class's exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with the program name supplied.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace brainergm::app
