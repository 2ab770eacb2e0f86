#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace maavi::cli {

/// Exit codes: 0 converged or success, 2 iteration limit reached, 1 any error.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Same as above with the arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace maavi::cli
