#pragma once

#include <stdexcept>
#include <string>

namespace fnls {

/// Bad input: parameter domain, malformed config, inconsistent grids.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to produce a usable result
/// (non-convergence, collapse of an iterate, empty input series).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fnls
