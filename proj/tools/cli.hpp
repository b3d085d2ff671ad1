// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes: 0 pass, 1 numeric failure, 2 usage or
// parse error, 3 residual or gate failure.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace quadaffine::cli {

enum ExitCode : int { kPass = 0, kNumeric = 1, kUsage = 2, kCheckFailed = 3 };

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace quadaffine::cli
