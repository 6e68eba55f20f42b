#include "misclassit/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "misclassit/errors.hpp"
#include "misclassit/estimators.hpp"
#include "misclassit/model.hpp"
#include "misclassit/theta.hpp"

namespace misclassit {

namespace {

constexpr int kValidationTag = 0;
constexpr int kNonValidationTag = 1;

struct Replicate {
  ReplicateStatus status = ReplicateStatus::Nonconverged;
  Vector beta;
  MisclassProbs theta;
};

Replicate run_replicate(const Dataset& data, const Vector& beta_hat, const SolverOptions& opts,
                        std::uint64_t seed, int b) {
  Stream sv = replicate_stream(seed, b, kValidationTag);
  Stream sn = replicate_stream(seed, b, kNonValidationTag);
  const Dataset star = resample(data, sv, sn);
  Replicate rep;
  try {
    rep.theta = estimate_theta(star).theta;
    SolverOptions warm = opts;
    warm.start = beta_hat;
    try {
      rep.beta = fit_pmle_with_theta(star, rep.theta, warm).beta_hat;
    } catch (const SolverError&) {
      SolverOptions cold = opts;
      cold.start.reset();
      rep.beta = fit_pmle_with_theta(star, rep.theta, cold).beta_hat;
    }
    rep.status = rep.beta.allFinite() ? ReplicateStatus::Ok : ReplicateStatus::Nonconverged;
  } catch (const SolverError&) {
    rep.status = ReplicateStatus::Nonconverged;
  } catch (const IdentifiabilityError&) {
    rep.status = ReplicateStatus::Degenerate;
  } catch (const DegenerateError&) {
    rep.status = ReplicateStatus::Degenerate;
  } catch (const EmptySampleError&) {
    rep.status = ReplicateStatus::Degenerate;
  }
  return rep;
}

std::vector<double> sorted_ok(const BootstrapDraws& draws, const auto& stat) {
  const Eigen::Index m = draws.beta_star.rows();
  if (m < 1) {
    throw InsufficientSuccesses("no successful bootstrap replicates", 0,
                                static_cast<int>(draws.statuses.size()));
  }
  std::vector<double> v(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) v[static_cast<std::size_t>(i)] = stat(draws.beta_star.row(i).transpose());
  std::sort(v.begin(), v.end());
  return v;
}

void check_eta(double eta) {
  if (!(eta > 0.0 && eta < 0.5)) throw DomainError("eta must be in (0, 1/2)");
}

}  // namespace

void BootstrapConfig::validate() const {
  if (B < 1) throw DomainError("bootstrap B must be >= 1");
  if (!(min_success_fraction > 0.0 && min_success_fraction <= 1.0)) {
    throw DomainError("min_success_fraction must be in (0,1]");
  }
  if (!(level > 0.0 && level < 1.0)) throw DomainError("level must be in (0,1)");
  if (threads < 1) throw DomainError("threads must be >= 1");
}

std::string_view to_string(ReplicateStatus s) {
  switch (s) {
    case ReplicateStatus::Ok: return "OK";
    case ReplicateStatus::Nonconverged: return "NONCONVERGED";
    case ReplicateStatus::Degenerate: return "DEGENERATE";
  }
  return "UNKNOWN";
}

int BootstrapDraws::count(ReplicateStatus s) const {
  return static_cast<int>(std::count(statuses.begin(), statuses.end(), s));
}

std::vector<std::size_t> resample_indices(std::size_t n, Stream& stream) {
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = stream.index(n);
  return idx;
}

Dataset resample(const Dataset& data, Stream& val, Stream& nonval) {
  if (data.n1() < 1) throw EmptySampleError("cannot resample an empty validation sample");
  const auto iv = resample_indices(static_cast<std::size_t>(data.n1()), val);
  const auto in = resample_indices(static_cast<std::size_t>(data.n2()), nonval);

  Matrix xv(data.n1(), data.p());
  std::vector<std::uint8_t> y(iv.size()), ytv(iv.size());
  for (std::size_t r = 0; r < iv.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(iv[r]);
    xv.row(static_cast<Eigen::Index>(r)) = data.validation_x().row(i);
    y[r] = data.y()[iv[r]];
    ytv[r] = data.validation_ytilde()[iv[r]];
  }
  Matrix xn(data.n2(), data.p());
  std::vector<std::uint8_t> ytn(in.size());
  for (std::size_t r = 0; r < in.size(); ++r) {
    xn.row(static_cast<Eigen::Index>(r)) = data.nonvalidation_x().row(static_cast<Eigen::Index>(in[r]));
    ytn[r] = data.nonvalidation_ytilde()[in[r]];
  }
  return Dataset(std::move(xv), std::move(y), std::move(ytv), std::move(xn), std::move(ytn),
                 data.has_intercept());
}

Stream replicate_stream(std::uint64_t seed, int b, int tag) {
  return Stream(seed, {static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(tag)});
}

BootstrapDraws run_bootstrap(const Dataset& data, const SolverOptions& opts,
                             const BootstrapConfig& cfg) {
  return run_bootstrap(data, fit_pmle(data, opts).beta_hat, opts, cfg);
}

BootstrapDraws run_bootstrap(const Dataset& data, const Vector& beta_hat,
                             const SolverOptions& opts, const BootstrapConfig& cfg) {
  cfg.validate();
  opts.validate();
  if (beta_hat.size() != data.p()) throw DimensionError("beta_hat length differs from p");
  std::vector<Replicate> reps(static_cast<std::size_t>(cfg.B));
  parallel_for(reps.size(), cfg.threads, [&](std::size_t b) {
    reps[b] = run_replicate(data, beta_hat, opts, cfg.seed, static_cast<int>(b));
  });

  BootstrapDraws out;
  out.beta_hat = beta_hat;
  out.n = data.n();
  out.statuses.reserve(reps.size());
  int ok = 0;
  for (const auto& r : reps) {
    out.statuses.push_back(r.status);
    if (r.status == ReplicateStatus::Ok) ++ok;
  }
  out.beta_star.resize(ok, data.p());
  out.theta_star.resize(ok, 2);
  int row = 0;
  for (const auto& r : reps) {
    if (r.status != ReplicateStatus::Ok) continue;
    out.beta_star.row(row) = r.beta.transpose();
    out.theta_star(row, 0) = r.theta.theta1;
    out.theta_star(row, 1) = r.theta.theta2;
    ++row;
  }
  if (static_cast<double>(ok) < cfg.min_success_fraction * cfg.B) {
    throw InsufficientSuccesses("too few bootstrap replicates succeeded", ok, cfg.B);
  }
  return out;
}

double percentile_quantile(std::span<const double> sorted, double eta) {
  if (sorted.empty()) throw EmptySampleError("no draws for quantile");
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("quantile level must be in (0,1)");
  const auto m = static_cast<double>(sorted.size());
  const double k = std::clamp(std::ceil(eta * m - 1e-9), 1.0, m);
  return sorted[static_cast<std::size_t>(k) - 1];
}

Interval percentile_ci_linear(const BootstrapDraws& draws, const Vector& c, double eta) {
  check_eta(eta);
  if (c.size() != draws.beta_hat.size()) throw DimensionError("c length differs from p");
  if (c.isZero(0.0)) throw DomainError("c must be non-zero");
  const double rn = std::sqrt(static_cast<double>(draws.n));
  const double center = c.dot(draws.beta_hat);
  const auto s = sorted_ok(draws, [&](const Vector& b) { return rn * (c.dot(b) - center); });
  return {center - percentile_quantile(s, 1.0 - eta) / rn,
          center - percentile_quantile(s, eta) / rn};
}

Interval percentile_ci_risk(const BootstrapDraws& draws, const Vector& x0, double eta) {
  check_eta(eta);
  if (x0.size() != draws.beta_hat.size()) throw DimensionError("x0 length differs from p");
  if (x0.isZero(0.0)) throw DomainError("x0 must be non-zero");
  const double rn = std::sqrt(static_cast<double>(draws.n));
  const double center = psi(x0.dot(draws.beta_hat));
  const auto s = sorted_ok(draws, [&](const Vector& b) { return rn * (psi(x0.dot(b)) - center); });
  const double lo = center - percentile_quantile(s, 1.0 - eta) / rn;
  const double hi = center - percentile_quantile(s, eta) / rn;
  return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
}

}  // namespace misclassit
