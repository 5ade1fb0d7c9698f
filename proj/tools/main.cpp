#include <iostream>
#include <string>
#include <vector>

#include "stylist/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return stylist::cli::run(args, std::cout, std::cerr);
}
