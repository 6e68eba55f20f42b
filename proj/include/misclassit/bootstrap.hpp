#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "misclassit/asymptotic.hpp"
#include "misclassit/dataset.hpp"
#include "misclassit/newton.hpp"
#include "misclassit/rng.hpp"

namespace misclassit {

struct BootstrapConfig {
  int B = 700;
  std::uint64_t seed = 0;
  double min_success_fraction = 0.95;
  double level = 0.95;
  int threads = 1;

  void validate() const;
};

enum class ReplicateStatus { Ok, Nonconverged, Degenerate };

std::string_view to_string(ReplicateStatus s);

struct BootstrapDraws {
  /// One row per successful replicate, in replicate order.
  Matrix beta_star;
  Matrix theta_star;
  /// One entry per replicate.
  std::vector<ReplicateStatus> statuses;
  RegressionCoef beta_hat;
  int n = 0;

  int count(ReplicateStatus s) const;
};

/// n indices drawn uniformly with replacement from [0, n).
std::vector<std::size_t> resample_indices(std::size_t n, Stream& stream);

/// Resamples the validation rows from `val` and the non-validation rows
/// from `nonval`, each with replacement and at its original size.
Dataset resample(const Dataset& data, Stream& val, Stream& nonval);

/// Stream used for one half of replicate b.
Stream replicate_stream(std::uint64_t seed, int b, int tag);

/// Fits the pseudo-likelihood estimator and bootstraps it.
BootstrapDraws run_bootstrap(const Dataset& data, const SolverOptions& opts,
                             const BootstrapConfig& cfg);

/// Bootstraps around an already computed estimate.
BootstrapDraws run_bootstrap(const Dataset& data, const Vector& beta_hat,
                             const SolverOptions& opts, const BootstrapConfig& cfg);

/// k-th order statistic of `sorted`, k = clamp(ceil(eta m), 1, m).
double percentile_quantile(std::span<const double> sorted, double eta);

/// (c'b - q(1-eta)/sqrt(n), c'b - q(eta)/sqrt(n)) with q the quantiles of
/// sqrt(n) (c'beta* - c'b).
Interval percentile_ci_linear(const BootstrapDraws& draws, const Vector& c, double eta);

/// The same construction for psi(x0'beta), clipped to [0, 1].
Interval percentile_ci_risk(const BootstrapDraws& draws, const Vector& x0, double eta);

}  // namespace misclassit
