#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace releq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read or is not parseable JSON.
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A function was evaluated outside the set where it is defined
/// (log of a nonpositive number, non-finite stencil value, box exit).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Malformed system-definition document (missing keys, wrong shapes,
/// unknown keys, unbound variables).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A well-formed document whose content fails a named check.
class ValidationError : public Error {
 public:
  ValidationError(std::string check, const std::string& what)
      : Error(what), check_(std::move(check)) {}
  const std::string& check() const noexcept { return check_; }

 private:
  std::string check_;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace releq
