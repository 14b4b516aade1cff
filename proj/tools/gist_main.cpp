#include <iostream>

#include "gist/cli.hpp"

int main(int argc, char** argv) { return gist::run_cli(argc, argv, std::cout, std::cerr); }
