#include <iostream>

#include "contagion/cli_io.hpp"

int main(int argc, char** argv) { return contagion::run_cli(argc, argv, std::cout, std::cerr); }
