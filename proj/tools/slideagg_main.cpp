#include <iostream>

#include "slideagg/cli.hpp"

int main(int argc, char** argv) {
  return slideagg::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
