#pragma once

#include <stdexcept>
#include <string>

namespace treemix {

/// Base class for every error raised by the library. The command-line tool
/// maps these to the "data/validation" exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed tree input: cycles, multiple parents, disconnected node sets.
class TreeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation (index order, ranges,
/// non-stochastic input, shape mismatch).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on an event of probability zero.
class ZeroProbabilityError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed the configured cap.
class EnumerationCapError : public Error {
 public:
  using Error::Error;
};

/// Model file could not be parsed or validated.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Iterative method did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace treemix
