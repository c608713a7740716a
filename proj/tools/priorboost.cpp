#include <iostream>

#include "priorboost/cli.hpp"

int main(int argc, char** argv) { return priorboost::cli::run(argc, argv, std::cout, std::cerr); }
