#include <iostream>

#include "tale/cli.hpp"

int main(int argc, char** argv) {
    return tale::cli::run_cli(argc, argv, std::cout, std::cerr);
}
