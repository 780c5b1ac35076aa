#pragma once

#include <stdexcept>
#include <string>

namespace granular {

// Bad inputs, malformed scenarios, violated preconditions. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failures of the numerics themselves (degenerate fits, non-convergence,
// defective eigenbases). CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace granular
