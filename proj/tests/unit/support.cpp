#include "support.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "tickgraph/cli.hpp"

namespace support {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string model_file(const std::string& name)
{
    return std::string(TICKGRAPH_MODELS_DIR) + "/" + name;
}

tickgraph::lang::Model load_model(const std::string& name)
{
    return tickgraph::lang::load(read_file(model_file(name)));
}

tickgraph::Mdp build(const tickgraph::lang::Model& model, unsigned jobs)
{
    tickgraph::ExploreLimits limits;
    limits.jobs = jobs;
    return tickgraph::explore(model.system(), limits);
}

std::vector<std::size_t> states_where(const tickgraph::Mdp& mdp, const tickgraph::lang::Model& model,
                                      const std::vector<std::string>& labels)
{
    std::vector<tickgraph::Bigraph> patterns;
    for (const auto& l : labels) {
        auto p = model.predicate(l);
        if (!p)
            throw std::runtime_error("no predicate " + l);
        patterns.push_back(p->body);
    }
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < mdp.states.size(); ++s) {
        bool all = true;
        for (const auto& p : patterns)
            all = all && tickgraph::occurs(mdp.states[s].bigraph, p);
        if (all)
            out.push_back(s);
    }
    return out;
}

CliResult cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    CliResult r;
    r.code = tickgraph::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string temp_dir(const std::string& tag)
{
    static std::atomic<int> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("tickgraph-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

} // namespace support
