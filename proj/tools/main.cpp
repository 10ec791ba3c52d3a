#include <iostream>
#include <string>
#include <vector>

#include "crackbench/commands.hpp"

int main(int argc, char** argv) {
    return crackbench::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
