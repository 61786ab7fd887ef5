#include <iostream>

#include "dal/cli.hpp"

int main(int argc, char** argv) { return dal::run_cli(argc, argv, std::cout, std::cerr); }
