// Copyright 2026 The Storyfier Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace storyfier {

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. `line()` is 1-based; 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : what + " at line " + std::to_string(line)), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Unreadable file or stream.
class IoError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Operation called while its precondition does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Turn-order violation in a writing session.
class OrderingError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Generation or grammar backend failed (transport, status or schema).
class BackendError : public Error {
 public:
  using Error::Error;
};

/// Statistic undefined for the given input (zero variance, all-zero differences).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Event log gap or corruption; carries the offending sequence number.
class ReplayError : public Error {
 public:
  ReplayError(const std::string& what, std::uint64_t seq)
      : Error(what + " at sequence " + std::to_string(seq)), seq_(seq) {}
  std::uint64_t sequence() const noexcept { return seq_; }

 private:
  std::uint64_t seq_;
};

}  // namespace storyfier
