#include "deconv/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return deconv::cli::run_cli(argc, argv, std::cerr); }
