#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ggflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A numerical routine produced a non-finite value or failed to certify its result.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what,
                          std::optional<std::vector<double>> best = std::nullopt)
      : Error(what), best_(std::move(best)) {}

  /// Best iterate reached before the failure, when one exists.
  const std::optional<std::vector<double>>& best_iterate() const { return best_; }

 private:
  std::optional<std::vector<double>> best_;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A quantity fell outside an accepted tolerance band (e.g. a negative radicand).
class ToleranceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Requested work exceeds the step budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A result that must exist by construction was not found.
class InternalError : public Error {
 public:
  using Error::Error;
};

/// The evidence does not support either branch of a decision.
class InconclusiveError : public Error {
 public:
  InconclusiveError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}

  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace ggflow
