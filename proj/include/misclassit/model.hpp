#pragma once

#include <Eigen/Dense>

#include "misclassit/dataset.hpp"

namespace misclassit {

/// Minimum |1 - theta1 - theta2| accepted wherever h2 is evaluated.
inline constexpr double kIdentifiabilityTol = 1e-6;

/// Box (delta1, delta2) bounding both misclassification probabilities.
struct ThetaBox {
  double delta1 = 1e-4;
  double delta2 = 1.0 - 1e-4;

  bool contains(const MisclassProbs& theta) const {
    return delta1 < theta.theta1 && theta.theta1 < delta2 && delta1 < theta.theta2 &&
           theta.theta2 < delta2;
  }
  /// Upper bound on 1 / (h3 (1 - h3)) over the box.
  double m0() const;
};

/// Logistic function, evaluated without exponentiating positive arguments.
double psi(double u);
double log_psi(double u);
double log_one_minus_psi(double u);

/// Row-level quantities shared by the score, its Jacobian and the plug-in
/// matrices. `h3c` is 1 - h3 computed directly rather than by subtraction;
/// `psi_over_h3` and `q_over_h3c` are psi/h3 and (1-psi)/(1-h3) in forms that
/// never divide by a vanishing h3 or 1 - h3.
struct LinkTerms {
  double psi;
  double one_minus_psi;
  double h3;
  double h3c;
  double psi_over_h3;
  double q_over_h3c;
  /// d(psi_over_h3)/du and d(q_over_h3c)/du.
  double d_psi_over_h3;
  double d_q_over_h3c;

  /// psi (1 - psi) / (h3 (1 - h3)).
  double variance_ratio() const { return psi_over_h3 * q_over_h3c; }
};

LinkTerms link_terms(double u, const MisclassProbs& theta);

/// Throws IdentifiabilityError unless |1 - theta1 - theta2| > tol.
void require_identifiable(const MisclassProbs& theta, double tol = kIdentifiabilityTol);

/// x (y - psi(x'beta)). Responses are taken as reals so the same kernel
/// evaluates conditional expectations.
Vector h1(const Vector& beta, double y, const Vector& x);

/// theta1 (1 - psi) + (1 - theta2) psi, i.e. P(Ytilde = 1 | x).
double h3(const Vector& beta, const MisclassProbs& theta, const Vector& x);

/// (1 - theta1 - theta2) x psi (1 - psi) (ytilde - h3) / (h3 (1 - h3)).
Vector h2(const Vector& beta, const MisclassProbs& theta, double ytilde, const Vector& x,
          double tol = kIdentifiabilityTol);

/// Scaled pseudo log-likelihood n^-1 log L(beta, theta_hat).
double pseudo_loglik(const Dataset& data, const Vector& beta, const MisclassProbs& theta_hat,
                     double tol = kIdentifiabilityTol);

/// Z_n(beta) = f_n mean_val h1 + (1 - f_n) mean_nonval h2.
Vector score(const Dataset& data, const Vector& beta, const MisclassProbs& theta_hat,
             double tol = kIdentifiabilityTol);

/// Analytic d Z_n / d beta.
Matrix score_jacobian(const Dataset& data, const Vector& beta, const MisclassProbs& theta_hat,
                      double tol = kIdentifiabilityTol);

}  // namespace misclassit
