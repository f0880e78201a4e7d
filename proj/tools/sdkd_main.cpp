// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/cli.hpp"

int main(int argc, char** argv) { return sdkd::run(argc, argv); }
