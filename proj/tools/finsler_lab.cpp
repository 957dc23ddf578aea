#include <iostream>
#include <string>
#include <vector>

#include "finsler/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return finsler::run_cli(args, std::cout, std::cerr);
}
