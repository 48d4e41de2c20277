#include "difact/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return difact::cli::run(argc, argv, std::cout, std::cerr);
}
