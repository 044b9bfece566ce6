#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kbqa {

// Base for failures caused by bad input data rather than bad usage.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DomainError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : DomainError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IntegrityError : public DomainError {
 public:
  using DomainError::DomainError;
};

class TaggingError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace kbqa
