#include <iostream>
#include <string>
#include <vector>

#include "opsplit/cli.hpp"

int main(int argc, char** argv) {
  return opsplit::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
