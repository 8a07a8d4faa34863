#pragma once

#include <stdexcept>
#include <string>

namespace admd {

/// Bad input or configuration: malformed files, dimension mismatches, invalid
/// arguments. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: divergence, non-finite intermediates, failed
/// factorizations. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace admd
