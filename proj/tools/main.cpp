#include <iostream>

#include "brwld/cli.hpp"

int main(int argc, char** argv) { return brwld::run_cli(argc, argv, std::cout, std::cerr); }
