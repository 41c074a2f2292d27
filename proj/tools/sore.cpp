#include "sore/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sore::cli_main(argc, argv, std::cin, std::cout, std::cerr); }
