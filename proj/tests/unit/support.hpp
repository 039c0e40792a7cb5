#ifndef TICKGRAPH_TESTS_SUPPORT_HPP
#define TICKGRAPH_TESTS_SUPPORT_HPP

#include <string>
#include <vector>

#include "tickgraph/lang.hpp"
#include "tickgraph/mdp.hpp"

namespace support {

std::string read_file(const std::string& path);
std::string model_file(const std::string& name);
tickgraph::lang::Model load_model(const std::string& name);
tickgraph::Mdp build(const tickgraph::lang::Model& model, unsigned jobs = 1);

/// States in which every listed predicate label holds.
std::vector<std::size_t> states_where(const tickgraph::Mdp& mdp, const tickgraph::lang::Model& model,
                                      const std::vector<std::string>& labels);

/// Runs the command line front end and captures its streams.
struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};
CliResult cli(const std::vector<std::string>& args);

/// Fresh empty directory under the system temp dir.
std::string temp_dir(const std::string& tag);

} // namespace support

#endif
