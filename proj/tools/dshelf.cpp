#include <iostream>
#include <string>
#include <vector>

#include "dshelf/cli.hpp"

int main(int argc, char** argv) {
  return dshelf::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
