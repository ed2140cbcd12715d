#include <iostream>

#include "chordvec/cli.h"

int main(int argc, char** argv) { return chordvec::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
