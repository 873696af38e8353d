#pragma once

#include <stdexcept>
#include <string>

namespace diffsamp {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input contains NaN, infinity, or a negative entry where none is allowed.
class InvalidValueError : public Error {
 public:
  explicit InvalidValueError(const std::string& msg) : Error(msg) {}
};

// No positive mass to normalize.
class AllZeroError : public Error {
 public:
  explicit AllZeroError(const std::string& msg) : Error(msg) {}
};

// A strategy or model parameter is outside its admissible interval.
class InvalidParamError : public Error {
 public:
  explicit InvalidParamError(const std::string& msg) : Error(msg) {}
};

// A mixture model violates one of its structural invariants.
class InvalidModelError : public Error {
 public:
  explicit InvalidModelError(const std::string& msg) : Error(msg) {}
};

// Malformed input record; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

}  // namespace diffsamp
