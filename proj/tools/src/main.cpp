#include <iostream>

#include "tickgraph/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return tickgraph::cli::run(args, std::cout, std::cerr);
}
