// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sdkd {

// Base of every error the library raises; the CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes or an invalid axis.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller violated a documented precondition (non-scalar loss, mismatched
// teacher/student configs, future memory given to a history-only model...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced by a forward or backward pass.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Token id outside the vocabulary.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

// Corpus or evaluation data unusable (empty, too small).
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (checkpoint magic, truncated payload, bad JSON).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Bad command line; the CLI maps it to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdkd
