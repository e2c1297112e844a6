#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drosc {

// Dispatches the drosc command line. Exit codes: 0 ok, 1 I/O or internal
// failure, 2 infeasible uncertainty class, 3 degenerate inference; CLI11
// parse/usage errors return its standard nonzero codes.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drosc
