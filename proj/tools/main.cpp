#include <iostream>

#include "iirl/cli/dispatch.hpp"

int main(int argc, char** argv) { return iirl::cli::dispatch(argc, argv, std::cout, std::cerr); }
