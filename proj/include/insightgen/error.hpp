// Copyright 2026 The insightgen Authors.
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace insightgen {

/// Bad user input: malformed files, dangling references, invalid arguments.
/// The CLI maps these to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error at a byte offset of some text (schema JSON, filter, template).
class ParseError : public InputError {
 public:
  ParseError(std::string what, std::size_t position)
      : InputError(what + " (at position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A cross-reference names an id that does not exist.
class ReferenceError : public InputError {
 public:
  ReferenceError(std::string what, std::string missing_id)
      : InputError(std::move(what)), missing_id_(std::move(missing_id)) {}

  const std::string& missing_id() const noexcept { return missing_id_; }

 private:
  std::string missing_id_;
};

/// Failure while the pipeline is running (exit code 2).
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace insightgen
