#pragma once

#include <stdexcept>
#include <string>

namespace faecc {

// Base for every error raised by the library. Callers that only care about
// "the request was invalid" catch this; the CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the domain of an operation (negative time, bad probability).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Result not representable (overflowing exponential, dimension overflow).
class OutOfRange : public Error {
 public:
  using Error::Error;
};

// Iterative method failed: non-convergent integral, bracket without a root.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace faecc
