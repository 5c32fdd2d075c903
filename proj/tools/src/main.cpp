#include <iostream>

#include "fdilab_cli/app.hpp"

int main(int argc, char** argv) {
    return fdilab::cli::run(argc, argv, std::cout, std::cerr);
}
