#include <iostream>

#include "kbqa/cli.hpp"

int main(int argc, char** argv) { return kbqa::cli::main(argc, argv, std::cout, std::cerr); }
