#include <iostream>

#include "torsion_moments/cli.hpp"

int main(int argc, char** argv) {
    return torsion_moments::cli::run(argc, argv, std::cout, std::cerr);
}
