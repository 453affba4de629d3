#ifndef TRUNCSEARCH_TOOLS_CLI_HPP
#define TRUNCSEARCH_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace truncsearch::cli {

enum ExitCode : int { kSuccess = 0, kBadConfig = 2, kNumericFailure = 3 };

/// Runs one subcommand. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace truncsearch::cli

#endif  // TRUNCSEARCH_TOOLS_CLI_HPP
