// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include "cotvars/cli.hpp"

int main(int argc, char** argv) { return cotvars::run(argc, argv); }
