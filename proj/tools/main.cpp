#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return cotg::cli::run(argc, argv, std::cerr); }
