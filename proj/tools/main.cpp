// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return quadaffine::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
