#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace streamfid {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad rate, unsorted input, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input data contradicts itself (conflicting duplicates, non-monotone counters).
class DataError : public Error {
 public:
  using Error::Error;
};

// An iterative solver stopped before meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Malformed JSONL input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace streamfid
