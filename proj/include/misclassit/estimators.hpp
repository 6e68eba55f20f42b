#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "misclassit/dataset.hpp"
#include "misclassit/newton.hpp"
#include "misclassit/theta.hpp"

namespace misclassit {

enum class Method { Naive, Pmle, Jmle, Cmle };

enum class Warning {
  ThetaOutOfUnitInterval,
  NearNonidentifiable,
  SeparationSuspected,
  StepCapHit,
  LargeLinearPredictor,
};

std::string_view to_string(Method m);
std::string_view to_string(Warning w);

struct FitResult {
  Method method = Method::Pmle;
  RegressionCoef beta_hat;
  std::optional<MisclassProbs> theta_hat;
  /// Validation-sample estimate behind theta_hat (PMLE only).
  std::optional<ThetaEstimate> theta_est;
  bool converged = false;
  int iterations = 0;
  double final_score_norm = 0.0;
  std::vector<Warning> warnings;

  bool has_warning(Warning w) const;
};

/// Plain logistic MLE of `response` on the rows of `x`.
FitResult fit_logistic(const Matrix& x, std::span<const std::uint8_t> response,
                       const SolverOptions& opts = {});

/// Logistic fit of Ytilde on X over all n rows, ignoring misclassification.
FitResult fit_naive(const Dataset& data, const SolverOptions& opts = {});

/// Pseudo-likelihood estimator: theta from the validation cells, then the
/// score in beta alone.
FitResult fit_pmle(const Dataset& data, const SolverOptions& opts = {});

/// Solves the pseudo-likelihood score with theta held at `theta`.
FitResult fit_pmle_with_theta(const Dataset& data, const MisclassProbs& theta,
                              const SolverOptions& opts = {});

/// Joint maximum likelihood over (beta, theta) on both samples.
FitResult fit_jmle(const Dataset& data, const SolverOptions& opts = {});

/// Maximum likelihood over (beta, theta) from (Ytilde, X) only. With a fixed
/// theta only beta is solved for.
FitResult fit_cmle(const Dataset& data, const SolverOptions& opts = {},
                   std::optional<MisclassProbs> fixed_theta = std::nullopt);

/// Residual of the joint likelihood equations in (beta, theta1, theta2).
/// Returns NaN entries where theta is non-identifiable.
Vector joint_score(const Dataset& data, const Vector& params);

}  // namespace misclassit
