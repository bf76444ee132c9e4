// Copyright 2026 The Compod Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace compod {

// Base of every error thrown by the library. Validation errors map to CLI
// exit code 2, I/O errors to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : IoError(what), offset_(offset) {}
  // Line number for text formats, byte offset for binary ones.
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedFormat : public IoError {
 public:
  using IoError::IoError;
};

class DegenerateInput : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateCell : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidLoops : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidPrimitive : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingNormals : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OpenProxyMesh : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NegativePairwise : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyMesh : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OpenMesh : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace compod
