#include <iostream>

#include "judgekit/cli.hpp"

int main(int argc, char** argv) { return judgekit::cli::run(argc, argv, std::cout, std::cerr); }
