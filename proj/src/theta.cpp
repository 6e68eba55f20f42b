#include "misclassit/theta.hpp"

#include <cmath>

#include "misclassit/errors.hpp"

namespace misclassit {

namespace {

constexpr double kA0Margin = 1e-6;

void tally(CellCounts& c, int y, int ytilde) {
  if (ytilde == 0) {
    (y == 0 ? c.n00 : c.n01) += 1;
  } else {
    (y == 0 ? c.n10 : c.n11) += 1;
  }
}

}  // namespace

CellCounts count_cells(std::span<const std::uint8_t> y, std::span<const std::uint8_t> ytilde) {
  if (y.size() != ytilde.size()) throw DimensionError("y and ytilde lengths differ");
  if (y.empty()) throw EmptySampleError("validation sample is empty");
  CellCounts c;
  for (std::size_t i = 0; i < y.size(); ++i) tally(c, y[i], ytilde[i]);
  return c;
}

CellCounts count_cells(const std::vector<ValidationObs>& validation) {
  if (validation.empty()) throw EmptySampleError("validation sample is empty");
  CellCounts c;
  for (const auto& obs : validation) tally(c, obs.y, obs.ytilde);
  return c;
}

CellCounts count_cells(const Dataset& data) {
  return count_cells(data.y(), data.validation_ytilde());
}

ThetaEstimate estimate_theta(const CellCounts& cells) {
  const int n1 = cells.n1();
  if (n1 < 1) throw EmptySampleError("validation sample is empty");
  ThetaEstimate est;
  est.cells = cells;
  est.n1 = n1;
  est.theta.theta1 = (0.5 + cells.n10) / (1.0 + cells.n00 + cells.n10);
  est.theta.theta2 = (0.5 + cells.n01) / (1.0 + cells.n01 + cells.n11);
  const double d = n1;
  est.pi_hat = {cells.n00 / d, cells.n01 / d, cells.n10 / d, cells.n11 / d};
  est.a0_hat = static_cast<double>(cells.n01 + cells.n11) / d;
  return est;
}

Eigen::Matrix3d sigma22(double a0, double pi2, double pi3) {
  const Eigen::Vector3d mu(1.0 - a0 - pi3, pi2, pi3);
  Eigen::Matrix3d s = -mu * mu.transpose();
  s.diagonal() += mu;
  return s;
}

Eigen::Matrix<double, 2, 3> b0(double a0, double pi2, double pi3) {
  // theta1 = pi3 / (1 - a0) with 1 - a0 = pi1 + pi3, and
  // theta2 = pi2 / a0 with a0 = 1 - pi1 - pi3.
  const double pi1 = 1.0 - a0 - pi3;
  const double q = (1.0 - a0) * (1.0 - a0);
  const double r = a0 * a0;
  Eigen::Matrix<double, 2, 3> m;
  m << -pi3 / q, 0.0, pi1 / q,
       pi2 / r, 1.0 / a0, pi2 / r;
  return m;
}

Eigen::Matrix2d theta_asymptotic_cov(const ThetaEstimate& est) {
  const double a0 = est.a0_hat;
  if (!(a0 > kA0Margin && a0 < 1.0 - kA0Margin)) {
    throw DegenerateError("a0_hat is on the boundary of (0,1); theta covariance undefined");
  }
  const double pi2 = est.pi_hat[1];
  const double pi3 = est.pi_hat[2];
  const auto b = b0(a0, pi2, pi3);
  Eigen::Matrix2d c = b * sigma22(a0, pi2, pi3) * b.transpose() / static_cast<double>(est.n1);
  c(1, 0) = c(0, 1);
  return c;
}

}  // namespace misclassit
