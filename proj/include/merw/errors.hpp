#pragma once

#include <stdexcept>
#include <string>

namespace merw {

// Numerical failures (non-convergence, reducible operators, empty ensembles)
// derive from NumericalError; bad inputs are reported as std::invalid_argument
// or std::out_of_range.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : NumericalError(what), iterations_(iterations), residual_(residual) {}

  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class ReducibleOperatorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EmptyEnsembleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Requested size exceeds what the chosen representation can hold.
class CapacityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Context shape does not fit inside the stripe.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace merw
