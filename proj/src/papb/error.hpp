// Copyright 2026 The papb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace papb {

/// Error categories surfaced through the C API as distinct status codes.
enum class ErrorKind {
  kArgument,
  kNumeric,
  kConfig,
  kParse,
  kData,
  kIo,
  kRuntime,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string &w) : Error(ErrorKind::kArgument, w) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string &w) : Error(ErrorKind::kNumeric, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string &w) : Error(ErrorKind::kConfig, w) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string &w) : Error(ErrorKind::kParse, w) {}
};
struct DataError : Error {
  explicit DataError(const std::string &w) : Error(ErrorKind::kData, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string &w) : Error(ErrorKind::kIo, w) {}
};

}  // namespace papb
