#pragma once

#include <stdexcept>

namespace switchlab {

// Raised when a caller breaks an operation's stated precondition.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when an internal invariant that the construction guarantees fails.
struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace switchlab
