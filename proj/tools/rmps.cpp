#include <iostream>

#include "rmps/cli.hpp"

int main(int argc, char** argv) { return rmps::run_cli(argc, argv, std::cout, std::cerr); }
