#include <iostream>
#include <string>
#include <vector>

#include "r2vf/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return r2vf::run_cli(args, std::cout, std::cerr);
}
