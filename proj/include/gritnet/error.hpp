#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gritnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input line. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Training produced a non-finite or increasing loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace gritnet
