#include <iostream>

#include "hmdp_cli/commands.hpp"

int main(int argc, char** argv) { return hmdp::cli::run(argc, argv, std::cout, std::cerr); }
