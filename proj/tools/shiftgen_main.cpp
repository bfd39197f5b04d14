#include <iostream>

#include "shiftgen/cli.hpp"

int main(int argc, char** argv) { return shiftgen::run_command(argc, argv, std::cout, std::cerr); }
