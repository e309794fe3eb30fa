#pragma once

#include <stdexcept>
#include <string>

namespace wse {

// Base class for all errors raised by the library. The CLI maps each
// subclass to a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or command-line usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or missing input data: parse failures, bad file formats,
// unknown tokens, missing upstream artifacts.
class DataError : public Error {
 public:
  using Error::Error;
};

// A structural invariant or operation precondition was violated.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace wse
