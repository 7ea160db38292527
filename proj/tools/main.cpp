#include <iostream>
#include <string>
#include <vector>

#include "jointkf/cli.hpp"

int main(int argc, char** argv) {
  return jointkf::cli::run(std::vector<std::string>(argv, argv + argc), std::cerr);
}
