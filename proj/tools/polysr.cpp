#include <iostream>

#include "polysr/cli.hpp"

int main(int argc, char** argv) { return polysr::cli::run(argc, argv, std::cout, std::cerr); }
