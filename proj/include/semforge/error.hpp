//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SEMFORGE_ERROR_HPP_
#define SEMFORGE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace semforge {

class Error: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SyntaxError: public Error {
public:
  SyntaxError(int line, const std::string &msg)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) { }

  int line() const noexcept { return line_; }

private:
  int line_;
};

// Inconsistent or unsupported model structure.
class ModelError: public Error {
public:
  using Error::Error;
};

// Malformed or insufficient data.
class DataError: public Error {
public:
  using Error::Error;
};

// (I - B) is singular at the requested parameter point.
class SingularError: public Error {
public:
  using Error::Error;
};

// Objective not defined at the requested point (e.g. implied covariance not
// positive definite).
class DomainError: public Error {
public:
  using Error::Error;
};

}  // namespace semforge

#endif  // SEMFORGE_ERROR_HPP_
