#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spde::cli {

enum ExitCode : int { ok = 0, validation_error = 1, numerical_failure = 2 };

/// Runs one subcommand. `args` excludes the program name, e.g.
/// {"mc", "--config", "mc.cfg", "--seed", "7"}. Diagnostics go to `err`,
/// short progress lines to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Column header of results.csv for each subcommand.
std::string results_header(const std::string& subcommand);

}  // namespace spde::cli
