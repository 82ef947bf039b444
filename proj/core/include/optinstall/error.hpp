#pragma once

#include <stdexcept>
#include <string>

namespace optinstall {

// Bad input data or an invalid parameter combination. The CLI maps this to
// exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical procedure failed (non-convergence, singular system, bracket
// failure, non-finite result). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace optinstall
