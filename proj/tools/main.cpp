#include <iostream>

#include "sgdmlab/cli.hpp"

int main(int argc, char** argv) { return sgdmlab::run_cli(argc, argv, std::cout, std::cerr); }
