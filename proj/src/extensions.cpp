#include "misclassit/extensions.hpp"

#include <cmath>
#include <string>

#include "misclassit/errors.hpp"
#include "misclassit/model.hpp"

namespace misclassit {

namespace {

constexpr double kLargePredictor = 30.0;

std::vector<MisclassProbs> thetas_of(const std::vector<ThetaEstimate>& ests) {
  std::vector<MisclassProbs> out;
  out.reserve(ests.size());
  for (const auto& e : ests) out.push_back(e.theta);
  return out;
}

std::vector<ThetaEstimate> estimate_group_thetas(const GroupedDataset& gd) {
  std::vector<ThetaEstimate> ests;
  for (int k = 0; k < gd.K(); ++k) {
    ests.push_back(estimate_theta(gd.group(k)));
    try {
      require_identifiable(ests.back().theta);
    } catch (const IdentifiabilityError& e) {
      throw IdentifiabilityError("group " + std::to_string(k) + ": " + e.what());
    }
  }
  return ests;
}

void check_thetas(const GroupedDataset& gd, const std::vector<MisclassProbs>& thetas) {
  if (static_cast<int>(thetas.size()) != gd.K()) {
    throw DimensionError("need one theta per group");
  }
}

FitResult solve_grouped(const GroupedDataset& gd, const std::vector<MisclassProbs>& thetas,
                        const SolverOptions& opts) {
  opts.validate();
  Vector start;
  if (opts.start) {
    start = *opts.start;
  } else {
    SolverOptions o = opts;
    try {
      start = fit_naive(gd.pooled(), o).beta_hat;
    } catch (const SolverError&) {
      start = Vector::Zero(gd.p());
    }
  }
  RootSystem sys;
  sys.residual = [&](const Vector& b) { return grouped_score(gd, b, thetas); };
  sys.jacobian = [&](const Vector& b) { return grouped_score_jacobian(gd, b, thetas); };
  SolverOptions o = opts;
  o.start.reset();
  const NewtonResult res = newton_root(sys, start, o);

  FitResult fit;
  fit.method = Method::Pmle;
  fit.beta_hat = res.x;
  fit.converged = true;
  fit.iterations = res.iterations;
  fit.final_score_norm = grouped_score(gd, res.x, thetas).cwiseAbs().maxCoeff();
  if (res.step_cap_hit) fit.warnings.push_back(Warning::StepCapHit);
  return fit;
}

}  // namespace

GroupedDataset::GroupedDataset(std::vector<Dataset> groups) : groups_(std::move(groups)) {
  if (groups_.empty()) throw EmptySampleError("grouped dataset needs at least one group");
  for (std::size_t k = 0; k < groups_.size(); ++k) {
    const Dataset& g = groups_[k];
    if (g.p() != groups_.front().p() || g.has_intercept() != groups_.front().has_intercept()) {
      throw DimensionError("group " + std::to_string(k) + " has a different covariate layout");
    }
    if (g.n1() < 1) {
      throw EmptySampleError("group " + std::to_string(k) + " has no validation rows");
    }
  }
}

int GroupedDataset::n() const {
  int n = 0;
  for (const auto& g : groups_) n += g.n();
  return n;
}

std::vector<double> GroupedDataset::weights() const {
  const double total = n();
  std::vector<double> w;
  for (const auto& g : groups_) w.push_back(g.n() / total);
  return w;
}

Dataset GroupedDataset::pooled() const {
  int n1 = 0;
  int n2 = 0;
  for (const auto& g : groups_) {
    n1 += g.n1();
    n2 += g.n2();
  }
  Matrix xv(n1, p()), xn(n2, p());
  std::vector<std::uint8_t> y, ytv, ytn;
  int rv = 0;
  int rn = 0;
  for (const auto& g : groups_) {
    xv.middleRows(rv, g.n1()) = g.validation_x();
    xn.middleRows(rn, g.n2()) = g.nonvalidation_x();
    rv += g.n1();
    rn += g.n2();
    y.insert(y.end(), g.y().begin(), g.y().end());
    ytv.insert(ytv.end(), g.validation_ytilde().begin(), g.validation_ytilde().end());
    ytn.insert(ytn.end(), g.nonvalidation_ytilde().begin(), g.nonvalidation_ytilde().end());
  }
  return Dataset(std::move(xv), std::move(y), std::move(ytv), std::move(xn), std::move(ytn),
                 groups_.front().has_intercept());
}

Vector grouped_score(const GroupedDataset& gd, const Vector& beta,
                     const std::vector<MisclassProbs>& thetas) {
  check_thetas(gd, thetas);
  const auto w = gd.weights();
  Vector out = Vector::Zero(gd.p());
  for (int k = 0; k < gd.K(); ++k) {
    out += w[static_cast<std::size_t>(k)] * score(gd.group(k), beta, thetas[static_cast<std::size_t>(k)]);
  }
  return out;
}

Matrix grouped_score_jacobian(const GroupedDataset& gd, const Vector& beta,
                              const std::vector<MisclassProbs>& thetas) {
  check_thetas(gd, thetas);
  const auto w = gd.weights();
  Matrix out = Matrix::Zero(gd.p(), gd.p());
  for (int k = 0; k < gd.K(); ++k) {
    out += w[static_cast<std::size_t>(k)] *
           score_jacobian(gd.group(k), beta, thetas[static_cast<std::size_t>(k)]);
  }
  return out;
}

GroupedFit fit_pmle_grouped(const GroupedDataset& gd, const SolverOptions& opts) {
  GroupedFit out;
  out.theta_ests = estimate_group_thetas(gd);
  out.fit = solve_grouped(gd, thetas_of(out.theta_ests), opts);
  return out;
}

GroupedCovariance grouped_covariance(const GroupedDataset& gd, const Vector& beta_hat,
                                     const std::vector<ThetaEstimate>& theta_ests) {
  if (static_cast<int>(theta_ests.size()) != gd.K()) {
    throw DimensionError("need one theta estimate per group");
  }
  const auto w = gd.weights();
  GroupedCovariance out;
  CovarianceBundle& t = out.total;
  const int p = gd.p();
  t.Sigma11 = Matrix::Zero(p, p);
  t.Sigma21 = Matrix::Zero(3, p);
  t.Gamma = Matrix::Zero(p, p);
  t.A0 = Matrix::Zero(p, 2);
  t.Zdot = Matrix::Zero(p, p);
  t.Sigma0 = Matrix::Zero(p, p);
  t.Sigma22.setZero();
  t.B0.setZero();
  t.theta_block.setZero();
  t.f_used = 0.0;
  for (int k = 0; k < gd.K(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Dataset& g = gd.group(k);
    CovarianceBundle b = plugin_moments(g.all_x(), beta_hat, theta_ests[ks].theta);
    assemble_sigma0(b, g.f_n(), theta_ests[ks]);
    t.Sigma11 += w[ks] * b.Sigma11;
    t.Sigma21 += w[ks] * b.Sigma21;
    t.Gamma += w[ks] * b.Gamma;
    t.A0 += w[ks] * b.A0;
    t.Zdot += w[ks] * b.Zdot;
    t.Sigma0 += w[ks] * b.Sigma0;
    t.Sigma22 += w[ks] * b.Sigma22;
    t.B0 += w[ks] * b.B0;
    t.theta_block += w[ks] * b.theta_block;
    t.f_used += w[ks] * b.f_used;
    out.per_group.push_back(std::move(b));
  }
  finish_beta_cov(t, gd.n());
  for (std::size_t k = 0; k < out.per_group.size(); ++k) {
    finish_beta_cov(out.per_group[k], gd.group(static_cast<int>(k)).n());
  }
  return out;
}

BootstrapDraws run_bootstrap_grouped(const GroupedDataset& gd, const Vector& beta_hat,
                                     const SolverOptions& opts, const BootstrapConfig& cfg) {
  cfg.validate();
  opts.validate();
  if (beta_hat.size() != gd.p()) throw DimensionError("beta_hat length differs from p");
  const int K = gd.K();
  struct Rep {
    ReplicateStatus status = ReplicateStatus::Nonconverged;
    Vector beta;
    Vector theta;
  };
  std::vector<Rep> reps(static_cast<std::size_t>(cfg.B));
  parallel_for(reps.size(), cfg.threads, [&](std::size_t b) {
    Rep& rep = reps[b];
    std::vector<Dataset> groups;
    for (int k = 0; k < K; ++k) {
      const auto id = static_cast<std::uint64_t>(b);
      Stream sv(cfg.seed, {id, static_cast<std::uint64_t>(k), 0});
      Stream sn(cfg.seed, {id, static_cast<std::uint64_t>(k), 1});
      groups.push_back(resample(gd.group(k), sv, sn));
    }
    try {
      const GroupedDataset star(std::move(groups));
      const auto ests = estimate_group_thetas(star);
      const auto thetas = thetas_of(ests);
      SolverOptions warm = opts;
      warm.start = beta_hat;
      try {
        rep.beta = solve_grouped(star, thetas, warm).beta_hat;
      } catch (const SolverError&) {
        SolverOptions cold = opts;
        cold.start.reset();
        rep.beta = solve_grouped(star, thetas, cold).beta_hat;
      }
      rep.theta.resize(2 * K);
      for (int k = 0; k < K; ++k) {
        rep.theta[2 * k] = thetas[static_cast<std::size_t>(k)].theta1;
        rep.theta[2 * k + 1] = thetas[static_cast<std::size_t>(k)].theta2;
      }
      rep.status = ReplicateStatus::Ok;
    } catch (const SolverError&) {
      rep.status = ReplicateStatus::Nonconverged;
    } catch (const Error&) {
      rep.status = ReplicateStatus::Degenerate;
    }
  });

  BootstrapDraws out;
  out.beta_hat = beta_hat;
  out.n = gd.n();
  int ok = 0;
  for (const auto& r : reps) {
    out.statuses.push_back(r.status);
    if (r.status == ReplicateStatus::Ok) ++ok;
  }
  out.beta_star.resize(ok, gd.p());
  out.theta_star.resize(ok, 2 * K);
  int row = 0;
  for (const auto& r : reps) {
    if (r.status != ReplicateStatus::Ok) continue;
    out.beta_star.row(row) = r.beta.transpose();
    out.theta_star.row(row) = r.theta.transpose();
    ++row;
  }
  if (static_cast<double>(ok) < cfg.min_success_fraction * cfg.B) {
    throw InsufficientSuccesses("too few bootstrap replicates succeeded", ok, cfg.B);
  }
  return out;
}

FitResult fit_pmle_theta2_zero(const Dataset& data, const SolverOptions& opts) {
  if (data.n1() < 1) throw EmptySampleError("pseudo-likelihood fit needs validation rows");
  ThetaEstimate est = estimate_theta(data);
  est.theta.theta2 = 0.0;
  FitResult fit = fit_pmle_with_theta(data, est.theta, opts);
  fit.theta_est = est;
  const Vector u = data.all_x() * fit.beta_hat;
  if (u.size() > 0 && u.cwiseAbs().maxCoeff() > kLargePredictor) {
    fit.warnings.push_back(Warning::LargeLinearPredictor);
  }
  return fit;
}

CovarianceBundle theta2_zero_covariance(const Dataset& data, const FitResult& fit) {
  if (!fit.theta_est) throw DomainError("fit carries no theta estimate");
  ThetaEstimate est = *fit.theta_est;
  est.theta.theta2 = 0.0;
  CovarianceBundle b = plugin_moments(data.all_x(), fit.beta_hat, est.theta);
  assemble_sigma0(b, data.f_n(), est, true);
  finish_beta_cov(b, data.n());
  return b;
}

}  // namespace misclassit
