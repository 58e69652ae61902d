#include <iostream>

#include "genprof_cli.hpp"

int main(int argc, char** argv) {
    return genprof::cli::run(argc, argv, std::cout, std::cerr);
}
