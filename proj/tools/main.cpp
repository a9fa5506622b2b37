#include <iostream>
#include <string>
#include <vector>

#include "binbell/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return binbell::run_cli(args, std::cout, std::cerr);
}
