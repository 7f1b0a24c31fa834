#include <iostream>

#include "dmn/harness.hpp"

int main(int argc, char** argv) { return dmn::harness::run(argc, argv, std::cout, std::cerr); }
