#ifndef TICKGRAPH_CLI_HPP
#define TICKGRAPH_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace tickgraph::cli {

enum ExitCode : int {
    ok = 0,
    property_failed = 1,
    usage_error = 2,
    resource_limit = 3,
};

/// Runs one command. `args` excludes the program name. Diagnostics and logs
/// go to `err`, results to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tickgraph::cli

#endif
