// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "amd/cli/commands.hpp"

int main(int argc, char** argv) { return amd::cli::run_cli(argc, argv, std::cout, std::cerr); }
