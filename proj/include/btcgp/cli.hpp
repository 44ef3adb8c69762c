#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace btcgp {

/// Runs one CLI invocation (argv without the program name) against the given
/// streams. Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
/// failure (lost positive definiteness or non-finite loss).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace btcgp
