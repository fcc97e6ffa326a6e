#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace r2vf {

/// Runs one command line (without the program name). Exit codes: 0 success,
/// 1 runtime or IO failure, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace r2vf
