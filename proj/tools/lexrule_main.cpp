#include <iostream>

#include "lexrule/cli.hpp"

int main(int argc, char** argv) {
    return lexrule::cli::run(argc, argv, std::cout, std::cerr);
}
