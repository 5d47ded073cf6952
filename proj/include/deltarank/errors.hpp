// Copyright 2026 The deltarank Authors. All Rights Reserved.
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

namespace deltarank {

// Bad input data, configuration or arguments. The CLI maps these to exit
// code 1; everything else that escapes is a runtime failure (exit code 2).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DuplicateItemError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A bad line in a sessions file.
class ParseError : public ValidationError {
 public:
  enum class Category { kMalformed, kSchemaViolation, kDuplicateItem };

  ParseError(std::size_t line, Category category, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what),
        line_(line),
        category_(category) {}

  std::size_t line() const { return line_; }
  Category category() const { return category_; }

 private:
  std::size_t line_;
  Category category_;
};

// No label variation anywhere in the training data.
class TrainingImpossible : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace deltarank
