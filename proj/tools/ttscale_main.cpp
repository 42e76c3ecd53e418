#include <iostream>

#include "ttscale/cli.hpp"

int main(int argc, char** argv) { return ttscale::cli::run(argc, argv, std::cout, std::cerr); }
