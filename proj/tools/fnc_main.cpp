#include <iostream>

#include "fnc/cli.hpp"

int main(int argc, char** argv) { return fnc::cli::run(argc, argv, std::cout, std::cerr); }
