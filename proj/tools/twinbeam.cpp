#include "twinbeam/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return twinbeam::run_cli(argc, argv, std::cout, std::cerr); }
