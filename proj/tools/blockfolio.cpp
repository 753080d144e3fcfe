#include <iostream>
#include <string>
#include <vector>

#include "blockfolio/cli.hpp"

int main(int argc, char** argv) {
  return blockfolio::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
