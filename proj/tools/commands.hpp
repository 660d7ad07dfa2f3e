#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ghostlab::cli {

/// Runs the ghostlab command line with `args` (excluding the program name).
/// Returns the process exit status: 0 on success, 1 on a runtime error,
/// 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ghostlab::cli
