// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sdkd {

// Subcommands: prepare-data, train-teacher, train-student, train-lm,
// generate, evaluate, analyze-robustness, analyze-wordfreq,
// classify-informative. Returns 0 on success, 2 on usage errors and 1 on
// any other failure; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace sdkd
