#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rw {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed textual input (group spec, matrix literal, element text).
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at position " + std::to_string(position) + ")"),
        pos(position) {}
  std::size_t pos;
};

/// A value does not fit the fixed-width backend it has to be moved into.
struct ArithmeticCapacityError : Error {
  using Error::Error;
};

/// Caller violated an operation precondition or a type invariant.
struct PreconditionError : Error {
  using Error::Error;
};

/// An enumeration would exceed its configured size cap.
struct ResourceCapError : Error {
  using Error::Error;
};

/// A cross-check between two independent routes disagreed.
struct InternalError : Error {
  using Error::Error;
};

}  // namespace rw
