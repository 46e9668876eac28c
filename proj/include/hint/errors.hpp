// Copyright (c) 2026 The HINT-CIR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace hint {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (matmul inner dims, concat widths, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a scalar argument was violated (tau <= 0, k out of range, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Misuse of the autodiff graph (non-scalar loss, repeated backward, ...).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// A loss or intermediate became NaN/Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Data errors: anything wrong with files or their contents. The CLI maps the
// whole family to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class BadMagicError : public DataError {
 public:
  using DataError::DataError;
};

class TruncatedFileError : public DataError {
 public:
  using DataError::DataError;
};

class DimensionOverflowError : public DataError {
 public:
  using DataError::DataError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hint
