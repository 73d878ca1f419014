#include <iostream>

#include "lossdepth/commands.hpp"

int main(int argc, char** argv) { return lossdepth::run_cli(argc, argv, std::cout, std::cerr); }
