#pragma once

#include <stdexcept>
#include <string>

namespace frdim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed arguments that violate an operation's preconditions
/// (dimension mismatch, out-of-range parameter, invalid distribution).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed: bad file header, truncated payload, rows that
/// fail validation, or a filter that leaves too few points to analyze.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not complete (singular system, budget
/// exceeded, undefined ratio).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace frdim
