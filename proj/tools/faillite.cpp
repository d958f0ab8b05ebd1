#include <iostream>
#include <string>
#include <vector>

#include "faillite/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return faillite::run_cli(args, std::cout, std::cerr);
}
