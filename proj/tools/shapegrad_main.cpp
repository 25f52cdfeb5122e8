#include <iostream>

#include "shapegrad/cli.hpp"

int main(int argc, char** argv) {
  return shapegrad::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
