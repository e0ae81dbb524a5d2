#include <iostream>

#include "ubranch/cli.hpp"

int main(int argc, char** argv) { return ubranch::cli::main(argc, argv, std::cout, std::cerr); }
