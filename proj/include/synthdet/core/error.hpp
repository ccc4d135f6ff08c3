// Copyright 2026 The synthdet Authors.
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

namespace synthdet {

/// Base class of every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (empty asset sets, bad ranges,
/// missing corpora for enabled augmentations).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An asset (mesh, texture, HDRI) could not be loaded or failed validation.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// A document parsed but does not follow the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Malformed JSON. Carries the byte offset reported by the parser.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte)
      : Error(what), byte_(byte) {}
  std::size_t byte() const noexcept { return byte_; }

 private:
  std::size_t byte_;
};

/// A value is outside its declared domain (e.g. a detection score > 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure. The message always names the path involved.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace synthdet
