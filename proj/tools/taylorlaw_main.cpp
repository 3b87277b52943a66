#include <iostream>

#include "taylorlaw/cli.hpp"

int main(int argc, char** argv) { return taylorlaw::cli::main_entry(argc, argv, std::cout, std::cerr); }
