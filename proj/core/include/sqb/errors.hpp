#pragma once

#include <stdexcept>
#include <string>

namespace sqb {

/// Raised for malformed arguments: dimension mismatches, empty batches,
/// invalid measures, out-of-range configuration values.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation is asked for more than it is allowed to do,
/// e.g. a dense Hessian above the configured dimension limit.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A step produced non-finite values. The message carries a state dump.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative procedure hit its iteration cap before its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text input could not be parsed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sqb
