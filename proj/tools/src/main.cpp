#include <iostream>

#include "qkica_tools/commands.hpp"

int main(int argc, char** argv) { return qkica::tools::run_cli(argc, argv, std::cout, std::cerr); }
