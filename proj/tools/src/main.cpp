#include <iostream>
#include <string>
#include <vector>

#include "nngs_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nngs::cli::run(args, std::cout, std::cerr);
}
