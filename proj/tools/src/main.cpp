#include <iostream>
#include <string>
#include <vector>

#include "ratelab/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ratelab::cli::run_command(args, std::cout, std::cerr);
}
