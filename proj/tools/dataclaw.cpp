#include <iostream>

#include "dataclaw/cli/commands.hpp"

int main(int argc, char** argv) { return dataclaw::cli::run(argc, argv, std::cout, std::cerr); }
