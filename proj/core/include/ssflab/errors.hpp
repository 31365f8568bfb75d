#pragma once

#include <stdexcept>
#include <string>

namespace ssflab {

/// Base for numerical failures raised by the library. Invalid user input is
/// reported with std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string operation, const std::string& what)
      : std::runtime_error(operation + ": " + what), operation_(std::move(operation)) {}
  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string operation_;
};

/// Argument outside the domain of a special function or kernel.
class DomainError : public NumericalError {
  using NumericalError::NumericalError;
};

/// Energy sits on a kernel pole (Dirichlet eigenvalue of the free operator).
class PoleError : public NumericalError {
  using NumericalError::NumericalError;
};

/// Energy on the spectral cut without a side tag.
class BranchError : public NumericalError {
  using NumericalError::NumericalError;
};

/// Iterative refinement did not meet its tolerance. Carries the last two iterates.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(std::string operation, const std::string& what, double previous, double last)
      : NumericalError(std::move(operation), what), previous_(previous), last_(last) {}
  double previous() const noexcept { return previous_; }
  double last() const noexcept { return last_; }

 private:
  double previous_;
  double last_;
};

class UnwrapError : public NumericalError {
 public:
  UnwrapError(std::string operation, const std::string& what, double lambda)
      : NumericalError(std::move(operation), what), lambda_(lambda) {}
  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

class CoverageError : public NumericalError {
  using NumericalError::NumericalError;
};

class NoBoundStateError : public NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace ssflab
