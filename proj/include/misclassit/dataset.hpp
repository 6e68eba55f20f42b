#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace misclassit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Regression coefficient vector (length p).
using RegressionCoef = Eigen::VectorXd;
/// One covariate row (length p).
using CovariateVector = Eigen::VectorXd;

/// Misclassification probabilities: theta1 = P(Ytilde=1 | Y=0) and
/// theta2 = P(Ytilde=0 | Y=1).
struct MisclassProbs {
  double theta1 = 0.0;
  double theta2 = 0.0;

  friend bool operator==(const MisclassProbs&, const MisclassProbs&) = default;
};

struct ValidationObs {
  int y = 0;
  int ytilde = 0;
  CovariateVector x;
};

struct NonValidationObs {
  int ytilde = 0;
  CovariateVector x;
};

/// Validation triples (Y, Ytilde, X) and non-validation pairs (Ytilde, X)
/// sharing one covariate dimension. Covariates are stored row-wise in two
/// dense matrices.
///
/// A dataset may hold zero validation rows (the contaminated-data and naive
/// fits need none); estimators that require validation data check n1() >= 1.
class Dataset {
 public:
  Dataset() = default;

  /// Throws DimensionError on shape mismatches and DomainError on
  /// non-binary responses, non-finite covariates, or a violated intercept
  /// column.
  Dataset(Matrix validation_x, std::vector<std::uint8_t> y,
          std::vector<std::uint8_t> validation_ytilde, Matrix nonvalidation_x,
          std::vector<std::uint8_t> nonvalidation_ytilde, bool has_intercept = false);

  static Dataset from_rows(const std::vector<ValidationObs>& validation,
                           const std::vector<NonValidationObs>& nonvalidation,
                           bool has_intercept = false);

  int n1() const { return static_cast<int>(y_.size()); }
  int n2() const { return static_cast<int>(nonvalidation_ytilde_.size()); }
  int n() const { return n1() + n2(); }
  int p() const { return static_cast<int>(validation_x_.cols()); }
  /// Validation fraction n1 / n.
  double f_n() const { return static_cast<double>(n1()) / static_cast<double>(n()); }
  bool has_intercept() const { return has_intercept_; }

  const Matrix& validation_x() const { return validation_x_; }
  const Matrix& nonvalidation_x() const { return nonvalidation_x_; }
  std::span<const std::uint8_t> y() const { return y_; }
  std::span<const std::uint8_t> validation_ytilde() const { return validation_ytilde_; }
  std::span<const std::uint8_t> nonvalidation_ytilde() const { return nonvalidation_ytilde_; }

  /// All n covariate rows, validation first.
  Matrix all_x() const;
  /// Surrogate responses of all n rows, validation first.
  std::vector<std::uint8_t> all_ytilde() const;

  ValidationObs validation(int i) const;
  NonValidationObs nonvalidation(int i) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  Matrix validation_x_;
  std::vector<std::uint8_t> y_;
  std::vector<std::uint8_t> validation_ytilde_;
  Matrix nonvalidation_x_;
  std::vector<std::uint8_t> nonvalidation_ytilde_;
  bool has_intercept_ = false;
};

}  // namespace misclassit
