#include <iostream>

#include "afnet/cli/app.hpp"

int main(int argc, char** argv) { return afnet::cli::run_cli(argc, argv, std::cout, std::cerr); }
