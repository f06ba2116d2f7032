// Copyright 2026 The bssanova Authors
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

namespace bssanova {

enum class ErrorKind {
  InvalidArgument,
  Domain,
  Data,
  Numerical,
  Io,
  Capability,
  Divergence,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind maps
/// one-to-one onto the status codes of the C interface.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error invalid_argument(const std::string& what) {
  return Error(ErrorKind::InvalidArgument, what);
}
inline Error domain_error(const std::string& what) {
  return Error(ErrorKind::Domain, what);
}
inline Error data_error(const std::string& what) {
  return Error(ErrorKind::Data, what);
}
inline Error numerical_error(const std::string& what) {
  return Error(ErrorKind::Numerical, what);
}
inline Error io_error(const std::string& what) {
  return Error(ErrorKind::Io, what);
}
inline Error capability_error(const std::string& what) {
  return Error(ErrorKind::Capability, what);
}

}  // namespace bssanova
