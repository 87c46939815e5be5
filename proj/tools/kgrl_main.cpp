#include <iostream>

#include "kgrl/cli/commands.hpp"

int main(int argc, char** argv) { return kgrl::cli::run(argc, argv, std::cout, std::cerr); }
