/* Copyright 2026 The esat Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ESAT_ERROR_HPP
#define ESAT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace esat {

class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid e-class ids, arity mismatches and similar misuse of the e-graph.
class StructuralError : public Error {
  using Error::Error;
};

/// Rule DSL or term syntax error; carries a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ShapeError : public Error {
  using Error::Error;
};

/// Malformed graph files, bad CLI flag combinations, unknown zoo models.
class ConfigError : public Error {
  using Error::Error;
};

class ExtractionError : public Error {
  using Error::Error;
};

/// No selection satisfies the extraction constraints (e.g. the whole root
/// e-class is blacklisted).
class InfeasibleError : public ExtractionError {
  using ExtractionError::ExtractionError;
};

/// The input exceeds the configured size bound of an exhaustive method.
class CapacityError : public Error {
  using Error::Error;
};

}  // namespace esat

#endif  // ESAT_ERROR_HPP
