#pragma once

#include <vector>

#include "misclassit/asymptotic.hpp"
#include "misclassit/bootstrap.hpp"
#include "misclassit/dataset.hpp"
#include "misclassit/estimators.hpp"
#include "misclassit/theta.hpp"

namespace misclassit {

/// Covariate-defined groups, each with its own misclassification rates and
/// its own validation sample.
class GroupedDataset {
 public:
  /// Throws DimensionError when groups disagree on p or the intercept flag
  /// and EmptySampleError when a group has no validation rows.
  explicit GroupedDataset(std::vector<Dataset> groups);

  int K() const { return static_cast<int>(groups_.size()); }
  int n() const;
  int p() const { return groups_.front().p(); }
  const Dataset& group(int k) const { return groups_.at(static_cast<std::size_t>(k)); }
  const std::vector<Dataset>& groups() const { return groups_; }
  /// Share n_k / n of each group.
  std::vector<double> weights() const;
  /// All groups stacked into one dataset, group order preserved.
  Dataset pooled() const;

 private:
  std::vector<Dataset> groups_;
};

struct GroupedFit {
  FitResult fit;
  std::vector<ThetaEstimate> theta_ests;
};

/// Sum over groups of (n_k / n) times the group's own score at its theta.
Vector grouped_score(const GroupedDataset& gd, const Vector& beta,
                     const std::vector<MisclassProbs>& thetas);
Matrix grouped_score_jacobian(const GroupedDataset& gd, const Vector& beta,
                              const std::vector<MisclassProbs>& thetas);

/// Per-group theta from the group's validation rows, then one shared beta.
GroupedFit fit_pmle_grouped(const GroupedDataset& gd, const SolverOptions& opts = {});

struct GroupedCovariance {
  CovarianceBundle total;
  std::vector<CovarianceBundle> per_group;
};

/// Weighted sum of per-group Sigma0 and Zdot, each built from the group's
/// own covariate moments, theta estimate and validation fraction.
GroupedCovariance grouped_covariance(const GroupedDataset& gd, const Vector& beta_hat,
                                     const std::vector<ThetaEstimate>& theta_ests);

/// Bootstrap resampling within each group. theta_star holds theta1, theta2
/// of every group in turn.
BootstrapDraws run_bootstrap_grouped(const GroupedDataset& gd, const Vector& beta_hat,
                                     const SolverOptions& opts, const BootstrapConfig& cfg);

/// Pseudo-likelihood fit with theta2 known to be zero.
FitResult fit_pmle_theta2_zero(const Dataset& data, const SolverOptions& opts = {});

/// Covariance for the theta2 = 0 fit; only theta1's variance enters.
CovarianceBundle theta2_zero_covariance(const Dataset& data, const FitResult& fit);

}  // namespace misclassit
