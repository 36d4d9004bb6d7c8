// Copyright 2026 The trajcast Authors
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

#ifndef TRAJCAST__ERRORS_HPP_
#define TRAJCAST__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace trajcast
{

/// Incompatible tensor shapes.
class DimensionError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition of an operation was violated (empty input, missing agent, ...).
class ContractError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Invalid or inconsistent configuration value.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// An input file or directory does not exist or cannot be opened.
class MissingInputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public std::runtime_error
{
public:
  ParseError(const std::string & what, std::size_t line = 0)
  : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line)
  {
  }
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// A checkpoint does not match the parameter layout of the model it is loaded into.
class CheckpointError : public std::runtime_error
{
public:
  CheckpointError(const std::string & what, std::string parameter = {})
  : std::runtime_error(what), parameter_(std::move(parameter))
  {
  }
  const std::string & parameter() const { return parameter_; }

private:
  std::string parameter_;
};

/// Non-finite values produced during a forward pass or training.
class NumericError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace trajcast

#endif  // TRAJCAST__ERRORS_HPP_
