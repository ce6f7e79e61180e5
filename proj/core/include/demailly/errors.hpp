#pragma once

#include <stdexcept>
#include <string>

namespace demailly {

/// Base class for numerical failures raised by the solvers.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterate left the admissible cone: some cone factor fell to or below
/// the configured floor.
class ConeViolation : public SolverError {
 public:
  ConeViolation(const std::string& what, double margin)
      : SolverError(what), margin_(margin) {}
  double margin() const noexcept { return margin_; }

 private:
  double margin_;
};

/// An inner iterative linear solve did not reach its tolerance.
class LinearSolveFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

/// The s-continuation inside the U operator could not reach s = 1.
class PathStall : public SolverError {
 public:
  PathStall(const std::string& what, double s_reached)
      : SolverError(what), s_reached_(s_reached) {}
  double s_reached() const noexcept { return s_reached_; }

 private:
  double s_reached_;
};

/// Damped Newton backtracking hit its step-length floor.
class NoDescent : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Damped Newton exhausted its iteration budget.
class MaxIters : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace demailly
