#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "misclassit/asymptotic.hpp"
#include "misclassit/dataset.hpp"
#include "misclassit/estimators.hpp"
#include "misclassit/rng.hpp"

namespace misclassit {

enum class ModelName { ModelA, ModelB, ModelC, P9, EtaDesign, Custom };

std::string_view to_string(ModelName m);

struct CovariateSpec {
  enum class Family {
    Intercept,
    Normal,          // mean a, sd b
    LogNormal,       // exp(N(a, b^2))
    Bernoulli,       // success probability a
    Uniform,         // on (a, b)
    Poisson,         // mean a
    ChiSquare2,
    NormalMixture,   // 0.6 N(-1, 1) + 0.4 N(4, 2)
    BivariateNormal  // two standard normal columns with correlation a
  };
  Family family = Family::Normal;
  double a = 0.0;
  double b = 1.0;
  /// Subtracted after drawing; set to the mean to center the covariate.
  double shift = 0.0;

  int columns() const { return family == Family::BivariateNormal ? 2 : 1; }
};

struct SimModel {
  ModelName name = ModelName::Custom;
  RegressionCoef beta0;
  MisclassProbs theta0;
  std::vector<CovariateSpec> covariates;

  int p() const;
  bool has_intercept() const;
};

SimModel model_a();
SimModel model_b();
SimModel model_c();
SimModel model_p9();
/// Two uncorrelated normal covariates, the second with sd sigma_of_eta(eta).
SimModel eta_design(double eta);

struct SimConfig {
  int n = 300;
  double f_n = 0.2;
  int reps = 250;
  std::uint64_t seed = 1;
  int B = 0;
  double level = 0.95;
  int threads = 1;
  /// Keep failed fits in the bias/MSE aggregates using their last iterate.
  bool raw_aggregation = true;

  int n1() const;
  void validate() const;
};

/// sigma(eta) for the eta design; DomainError outside (0, 0.97).
double sigma_of_eta(double eta);

Matrix generate_covariates(const SimModel& model, int rows, Stream& stream);

/// Draws n rows; the first round(n f_n) become the validation sample.
Dataset generate_dataset(const SimModel& model, const SimConfig& cfg, Stream& stream);
Dataset generate_dataset(const SimModel& model, int n, int n1, Stream& stream);

struct EstimateStats {
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  int used = 0;
  int failures = 0;
  std::vector<double> values;
};

EstimateStats summarize_estimates(const std::vector<double>& values, double truth, int failures);

struct MethodSummary {
  Method method = Method::Pmle;
  EstimateStats beta1;
  std::optional<EstimateStats> theta1;
};

struct EtaSummary {
  double eta = 0.0;
  double sigma = 0.0;
  std::vector<MethodSummary> methods;

  const MethodSummary& method(Method m) const;
};

struct BiasMseSummary {
  SimConfig cfg;
  MisclassProbs theta0;
  std::vector<EtaSummary> rows;
};

/// For every eta, fits JMLE, PMLE, CMLE and the naive estimator to cfg.reps
/// simulated datasets and aggregates the first coefficient and theta1.
BiasMseSummary run_bias_mse_study(const std::vector<double>& etas, const SimConfig& cfg,
                                  MisclassProbs theta0 = {0.1, 0.3});

struct CoverageStats {
  double coverage = 0.0;
  double avg_length = 0.0;
  int used = 0;
};

CoverageStats summarize_coverage(const std::vector<Interval>& intervals, double truth);

struct CoverageSummary {
  std::string model;
  SimConfig cfg;
  std::vector<CoverageStats> asymptotic;
  std::vector<CoverageStats> bootstrap;
  int fit_failures = 0;
  int covariance_failures = 0;
  int bootstrap_failures = 0;
};

/// Per replicate: PMLE, Wald intervals and (when cfg.B > 0) bootstrap
/// percentile intervals for every coefficient.
CoverageSummary run_coverage_study(const SimModel& model, const SimConfig& cfg);

}  // namespace misclassit
