#include <iostream>

#include "casg/cli.hpp"

int main(int argc, char** argv) { return casg::run_cli(argc, argv, std::cout, std::cerr); }
