// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line pipeline: gen, render, grade, intervene, probe, report.
// Exit codes: 0 success, 1 validation failure, 2 I/O failure.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cotvars {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportFormatVersion = 1;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace cotvars
