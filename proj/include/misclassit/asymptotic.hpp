#pragma once

#include <vector>

#include <Eigen/Dense>

#include "misclassit/dataset.hpp"
#include "misclassit/theta.hpp"

namespace misclassit {

/// Plug-in matrices behind the sandwich covariance of the pseudo-likelihood
/// estimator. Expectations over X are empirical means over all covariate rows.
struct CovarianceBundle {
  Matrix Sigma11;           // p x p
  Matrix Sigma21;           // 3 x p
  Eigen::Matrix3d Sigma22;
  Matrix Gamma;             // p x p
  Matrix A0;                // p x 2
  Eigen::Matrix<double, 2, 3> B0;
  /// B0 Sigma22 B0', the limiting covariance of sqrt(n1) (theta_hat - theta).
  Eigen::Matrix2d theta_block;
  Matrix Zdot;              // p x p
  Matrix Sigma0;            // p x p
  Matrix beta_cov;          // Zdot^-1 Sigma0 Zdot^-T / n
  double f_used = 0.0;
  int n = 0;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double length() const { return upper - lower; }
  bool contains(double v) const { return lower <= v && v <= upper; }
};

/// Standard normal quantile (Wichura's AS241, about 1e-16 relative accuracy).
double normal_quantile(double p);

/// Sigma11, Sigma21, Gamma and A0 at (beta, theta); other fields stay empty.
CovarianceBundle plugin_moments(const Matrix& x, const Vector& beta, const MisclassProbs& theta);

/// Fills Sigma22, B0, theta_block, Zdot and Sigma0 of `b` from its moments.
/// With `theta2_zero` the theta2 row of B0 is zeroed. Throws DegenerateError
/// when a0 is on the boundary and f < 1.
void assemble_sigma0(CovarianceBundle& b, double f, const ThetaEstimate& est,
                     bool theta2_zero = false);

/// beta_cov = Zdot^-1 Sigma0 Zdot^-T / n. Throws SingularZdot when Zdot's
/// condition number exceeds 1e12.
void finish_beta_cov(CovarianceBundle& b, int n);

CovarianceBundle estimate_bundle(const Dataset& data, const Vector& beta_hat,
                                 const ThetaEstimate& theta_est);

std::vector<Interval> wald_ci(const CovarianceBundle& bundle, const Vector& beta_hat,
                              double level);

Interval linear_functional_ci(const CovarianceBundle& bundle, const Vector& beta_hat,
                              const Vector& c, double level);

/// Delta-method interval for psi(x0' beta), clipped to [0, 1].
Interval risk_ci_delta(const CovarianceBundle& bundle, const Vector& beta_hat, const Vector& x0,
                       double level);

}  // namespace misclassit
