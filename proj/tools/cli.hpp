#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pathgraph::cli {

/// Runs the `pathgraph` command line with `args` (excluding argv[0]).
/// Returns 0 on success, 2 for usage/config/input errors, 1 for runtime
/// failures; error lines are written to `err` prefixed with "error:".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pathgraph::cli
