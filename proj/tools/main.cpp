#include <iostream>

#include "brainergm/app/cli.hpp"

int main(int argc, char** argv) { return brainergm::app::run(argc, argv, std::cout, std::cerr); }
