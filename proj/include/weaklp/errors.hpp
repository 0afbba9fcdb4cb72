#pragma once

#include <stdexcept>
#include <string>

namespace weaklp {

/// Argument outside the documented domain of an operation.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold (e.g. lambda <= L
/// for the sandwich radii, or an explicit grid that misses the required box).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Two independent computations of the same quantity disagree beyond their
/// tolerance. Experiments abort on this.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace weaklp
