#include "misclassit/dataset.hpp"

#include <cmath>
#include <string>

#include "misclassit/errors.hpp"

namespace misclassit {

namespace {

void check_binary(std::span<const std::uint8_t> v, const char* what) {
  for (auto b : v) {
    if (b > 1) throw DomainError(std::string(what) + " must be 0 or 1");
  }
}

void check_covariates(const Matrix& x, bool has_intercept, const char* what) {
  if (!x.allFinite()) throw DomainError(std::string(what) + " covariates must be finite");
  if (has_intercept && x.rows() > 0 && (x.col(0).array() != 1.0).any()) {
    throw DomainError(std::string(what) + ": intercept column must be identically 1");
  }
}

}  // namespace

Dataset::Dataset(Matrix validation_x, std::vector<std::uint8_t> y,
                 std::vector<std::uint8_t> validation_ytilde, Matrix nonvalidation_x,
                 std::vector<std::uint8_t> nonvalidation_ytilde, bool has_intercept)
    : validation_x_(std::move(validation_x)),
      y_(std::move(y)),
      validation_ytilde_(std::move(validation_ytilde)),
      nonvalidation_x_(std::move(nonvalidation_x)),
      nonvalidation_ytilde_(std::move(nonvalidation_ytilde)),
      has_intercept_(has_intercept) {
  if (validation_x_.cols() != nonvalidation_x_.cols()) {
    throw DimensionError("validation and non-validation covariate dimensions differ");
  }
  if (validation_x_.cols() < 1) throw DimensionError("covariate dimension p must be >= 1");
  if (static_cast<std::size_t>(validation_x_.rows()) != y_.size() ||
      y_.size() != validation_ytilde_.size()) {
    throw DimensionError("validation sample: row counts of y, ytilde and x differ");
  }
  if (static_cast<std::size_t>(nonvalidation_x_.rows()) != nonvalidation_ytilde_.size()) {
    throw DimensionError("non-validation sample: row counts of ytilde and x differ");
  }
  if (n() < 1) throw EmptySampleError("dataset has no rows");
  check_binary(y_, "y");
  check_binary(validation_ytilde_, "ytilde");
  check_binary(nonvalidation_ytilde_, "ytilde");
  check_covariates(validation_x_, has_intercept_, "validation");
  check_covariates(nonvalidation_x_, has_intercept_, "non-validation");
}

Dataset Dataset::from_rows(const std::vector<ValidationObs>& validation,
                           const std::vector<NonValidationObs>& nonvalidation,
                           bool has_intercept) {
  Eigen::Index p = 0;
  if (!validation.empty()) {
    p = validation.front().x.size();
  } else if (!nonvalidation.empty()) {
    p = nonvalidation.front().x.size();
  }
  Matrix xv(static_cast<Eigen::Index>(validation.size()), p);
  std::vector<std::uint8_t> y(validation.size());
  std::vector<std::uint8_t> ytv(validation.size());
  auto to_binary = [](int v) {
    if (v != 0 && v != 1) throw DomainError("responses must be 0 or 1");
    return static_cast<std::uint8_t>(v);
  };
  for (std::size_t i = 0; i < validation.size(); ++i) {
    if (validation[i].x.size() != p) throw DimensionError("covariate length differs from p");
    xv.row(static_cast<Eigen::Index>(i)) = validation[i].x.transpose();
    y[i] = to_binary(validation[i].y);
    ytv[i] = to_binary(validation[i].ytilde);
  }
  Matrix xn(static_cast<Eigen::Index>(nonvalidation.size()), p);
  std::vector<std::uint8_t> ytn(nonvalidation.size());
  for (std::size_t i = 0; i < nonvalidation.size(); ++i) {
    if (nonvalidation[i].x.size() != p) throw DimensionError("covariate length differs from p");
    xn.row(static_cast<Eigen::Index>(i)) = nonvalidation[i].x.transpose();
    ytn[i] = to_binary(nonvalidation[i].ytilde);
  }
  return Dataset(std::move(xv), std::move(y), std::move(ytv), std::move(xn), std::move(ytn),
                 has_intercept);
}

Matrix Dataset::all_x() const {
  Matrix out(n(), p());
  out.topRows(n1()) = validation_x_;
  out.bottomRows(n2()) = nonvalidation_x_;
  return out;
}

std::vector<std::uint8_t> Dataset::all_ytilde() const {
  std::vector<std::uint8_t> out(validation_ytilde_);
  out.insert(out.end(), nonvalidation_ytilde_.begin(), nonvalidation_ytilde_.end());
  return out;
}

ValidationObs Dataset::validation(int i) const {
  return {y_.at(static_cast<std::size_t>(i)), validation_ytilde_.at(static_cast<std::size_t>(i)),
          validation_x_.row(i).transpose()};
}

NonValidationObs Dataset::nonvalidation(int i) const {
  return {nonvalidation_ytilde_.at(static_cast<std::size_t>(i)), nonvalidation_x_.row(i).transpose()};
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.has_intercept_ == b.has_intercept_ && a.y_ == b.y_ &&
         a.validation_ytilde_ == b.validation_ytilde_ &&
         a.nonvalidation_ytilde_ == b.nonvalidation_ytilde_ &&
         a.validation_x_.rows() == b.validation_x_.rows() &&
         a.validation_x_.cols() == b.validation_x_.cols() &&
         a.nonvalidation_x_.rows() == b.nonvalidation_x_.rows() &&
         a.validation_x_ == b.validation_x_ && a.nonvalidation_x_ == b.nonvalidation_x_;
}

}  // namespace misclassit
