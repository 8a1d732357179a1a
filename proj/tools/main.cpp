// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <string>
#include <vector>

#include "cli/cli.hpp"

int main(int argc, char** argv) {
  return nnfs::cli::run(std::vector<std::string>(argv, argv + argc), std::cout,
                        std::cerr);
}
