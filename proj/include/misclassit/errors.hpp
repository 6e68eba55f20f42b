#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace misclassit {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// theta1 + theta2 within tolerance of 1: the surrogate carries no information.
class IdentifiabilityError : public Error {
 public:
  using Error::Error;
};

// A log or ratio argument left its admissible range.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Plug-in quantity on the boundary where a matrix is undefined (e.g. a0 in {0,1}).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Input file does not follow the CSV or configuration schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class EmptySampleError : public Error {
 public:
  using Error::Error;
};

class SingularZdot : public Error {
 public:
  using Error::Error;
};

class InsufficientSuccesses : public Error {
 public:
  InsufficientSuccesses(const std::string& what, int ok, int total)
      : Error(what), ok_(ok), total_(total) {}
  int ok() const { return ok_; }
  int total() const { return total_; }

 private:
  int ok_;
  int total_;
};

// Root finding failed. Carries the last iterate so callers can report it;
// it is never returned as if it were a solution.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, Eigen::VectorXd last_iterate, int iterations,
              double residual_norm)
      : Error(what),
        last_iterate_(std::move(last_iterate)),
        iterations_(iterations),
        residual_norm_(residual_norm) {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  int iterations() const { return iterations_; }
  double residual_norm() const { return residual_norm_; }

 private:
  Eigen::VectorXd last_iterate_;
  int iterations_;
  double residual_norm_;
};

class NonConvergence : public SolverError {
 public:
  using SolverError::SolverError;
};

class SingularJacobian : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace misclassit
