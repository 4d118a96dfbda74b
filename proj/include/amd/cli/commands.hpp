// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>

namespace amd::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kIoError = 3,
  kDivergence = 4,
  kContractViolation = 5,
};

/// Entry point of the `amd` tool. Summaries go to `out`, diagnostics to
/// `err`; the return value is the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace amd::cli
