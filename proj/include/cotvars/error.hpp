// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// Error types shared by every module. ValidationError maps to CLI exit
// status 1, IoError to exit status 2.

#pragma once

#include <stdexcept>
#include <string>

namespace cotvars {

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cotvars
