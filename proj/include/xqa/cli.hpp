#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xqa::cli {

// Entry point of `xqa-eval`. Returns the process exit code:
// 0 success, 1 usage, 2 data validation, 3 transport.
int run(int argc, char** argv);

// Same, with explicit arguments (without the program name) and streams.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xqa::cli
