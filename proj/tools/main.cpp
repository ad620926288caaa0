#include <iostream>

#include "scanalr/cli.hpp"

int main(int argc, char** argv) { return scanalr::run_cli(argc, argv, std::cout, std::cerr); }
