#include <iostream>

#include "wse/cli.hpp"

int main(int argc, char** argv) { return wse::run_cli(argc, argv, std::cout, std::cerr); }
