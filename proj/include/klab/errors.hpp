#pragma once

#include <stdexcept>
#include <string>

namespace klab {

// Bad input, contract or precondition violation. The CLI maps it to exit code 2.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure failed to deliver (non-convergence, step underflow).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace klab
