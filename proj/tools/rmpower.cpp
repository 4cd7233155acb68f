#include <iostream>

#include "rmpower/cli.hpp"

int main(int argc, char** argv) { return rmpower::cli::run_cli(argc, argv, std::cout, std::cerr); }
