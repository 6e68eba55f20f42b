#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>

#include "misclassit/dataset.hpp"

namespace misclassit {

/// Cross-tabulation of (Ytilde, Y) over the validation sample. The first
/// index is Ytilde, the second Y.
struct CellCounts {
  int n00 = 0;
  int n01 = 0;
  int n10 = 0;
  int n11 = 0;

  int n1() const { return n00 + n01 + n10 + n11; }
  friend bool operator==(const CellCounts&, const CellCounts&) = default;
};

struct ThetaEstimate {
  MisclassProbs theta;
  int n1 = 0;
  CellCounts cells;
  double a0_hat = 0.0;
  /// Unadjusted cell frequencies (n00, n01, n10, n11) / n1.
  std::array<double, 4> pi_hat{};
};

CellCounts count_cells(std::span<const std::uint8_t> y, std::span<const std::uint8_t> ytilde);
CellCounts count_cells(const std::vector<ValidationObs>& validation);
CellCounts count_cells(const Dataset& data);

/// Haldane-adjusted ratio estimates (add 1/2 to every cell).
ThetaEstimate estimate_theta(const CellCounts& cells);
inline ThetaEstimate estimate_theta(const Dataset& data) { return estimate_theta(count_cells(data)); }

/// Covariance of W = (V1, V2, V3), a single multinomial draw over the first
/// three cells.
Eigen::Matrix3d sigma22(double a0, double pi2, double pi3);

/// Jacobian of theta with respect to the cell probabilities (pi1, pi2, pi3).
Eigen::Matrix<double, 2, 3> b0(double a0, double pi2, double pi3);

/// Plug-in B0 Sigma22 B0' / n1. Throws DegenerateError when a0_hat is within
/// 1e-6 of 0 or 1.
Eigen::Matrix2d theta_asymptotic_cov(const ThetaEstimate& est);

}  // namespace misclassit
