#include "admd/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return admd::cli::run(argc, argv, std::cout, std::cerr); }
