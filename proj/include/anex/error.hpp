#pragma once

#include <stdexcept>
#include <string>

namespace anex {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched qubit counts, matrix shapes, or out-of-range site indices.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// The request is well-formed but the device/control set cannot realize it.
/// `missing` names the control or capability that is absent when known.
class CapabilityError : public Error {
 public:
  explicit CapabilityError(const std::string& what, std::string missing = "")
      : Error(what), missing(std::move(missing)) {}
  std::string missing;
};

/// A configured resource cap (dense dimension, closure dimension) was hit.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed. Position is 1-based.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& what)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line(line),
        column(column) {}
  int line;
  int column;
};

}  // namespace anex
