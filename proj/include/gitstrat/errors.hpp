#pragma once

#include <stdexcept>
#include <string>

namespace gitstrat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was violated by its arguments.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An invariant that must hold for valid inputs failed; never swallowed.
class InternalError : public Error {
 public:
  using Error::Error;
};

inline void require_dims(std::size_t got, std::size_t expected, const char* what) {
  if (got != expected) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " +
                            std::to_string(expected) + ", got " + std::to_string(got));
  }
}

}  // namespace gitstrat
