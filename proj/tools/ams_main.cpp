#include <iostream>

#include "ams/cli/dispatch.hpp"

int main(int argc, char** argv) { return ams::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
