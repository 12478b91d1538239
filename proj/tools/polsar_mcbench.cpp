#include <iostream>
#include <string>
#include <vector>

#include "polsar/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return polsar::cli::run(args, std::cout, std::cerr);
}
