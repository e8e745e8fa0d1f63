#pragma once

#include <stdexcept>
#include <string>

namespace mckv {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two operands live on different grids or time discretisations.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Values left the declared domain of a user-supplied nonlinearity.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A time integration produced non-finite or exploding coefficients.
class NumericalAbort : public Error {
 public:
  NumericalAbort(const std::string& what, int step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace mckv
