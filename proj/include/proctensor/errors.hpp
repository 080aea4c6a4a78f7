#pragma once

#include <stdexcept>
#include <string>

namespace proctensor {

// Malformed or inconsistent input (bad dimensions, invalid states, unknown
// config fields).  The CLI maps it to exit status 2.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A computation that cannot complete numerically (singular Gram matrix,
// rank-deficient frames, sampling that never reaches the target rank).
// The CLI maps it to exit status 3.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace proctensor
