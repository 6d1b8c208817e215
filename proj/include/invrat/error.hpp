// Copyright 2026 The InvRat Authors.
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

#ifndef INVRAT_ERROR_HPP_
#define INVRAT_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace invrat {

// Base of every exception the library throws. The C API maps each subclass
// onto one invrat_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  // 1-based; 0 when the error is not tied to a line.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Conditioning on an event of zero probability.
class UndefinedConditional : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long step, double last_li,
                  double last_le)
      : Error(what), step_(step), last_li_(last_li), last_le_(last_le) {}
  long step() const { return step_; }
  double last_li() const { return last_li_; }
  double last_le() const { return last_le_; }

 private:
  long step_;
  double last_li_;
  double last_le_;
};

}  // namespace invrat

#endif  // INVRAT_ERROR_HPP_
