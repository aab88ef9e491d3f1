#include <iostream>

#include "tru/cli.hpp"

int main(int argc, char** argv) { return tru::cli_main(argc, argv, std::cout, std::cerr); }
