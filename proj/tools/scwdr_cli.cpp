#include <iostream>

#include "scwdr/commands.hpp"

int main(int argc, char** argv) { return scwdr::run_cli(argc, argv, std::cout, std::cerr); }
