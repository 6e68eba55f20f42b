#include "misclassit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "misclassit/errors.hpp"
#include "misclassit/model.hpp"

namespace misclassit {

namespace {

constexpr double kSeparationNorm = 50.0;
constexpr double kNearLinearLo = 0.1;
constexpr double kNearLinearHi = 0.9;
constexpr double kNearLinearFraction = 0.95;

const SolverOptions& checked(const SolverOptions& opts) {
  opts.validate();
  return opts;
}

void add_warning(FitResult& fit, Warning w) {
  if (!fit.has_warning(w)) fit.warnings.push_back(w);
}

Vector logistic_score(const Matrix& x, std::span<const std::uint8_t> y, const Vector& beta) {
  const Vector u = x * beta;
  Vector r(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) r[i] = y[i] - psi(u[i]);
  return x.transpose() * r / static_cast<double>(x.rows());
}

Matrix logistic_jacobian(const Matrix& x, const Vector& beta) {
  const Vector u = x * beta;
  Vector w(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) w[i] = psi(u[i]) * psi(-u[i]);
  return -(x.transpose() * (x.array().colwise() * w.array()).matrix()) /
         static_cast<double>(x.rows());
}

// True when the fitted linear predictor classifies every row correctly.
bool perfectly_separated(const Matrix& x, std::span<const std::uint8_t> y, const Vector& beta) {
  const Vector u = x * beta;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if ((y[i] == 1) != (u[i] > 0.0) || u[i] == 0.0) return false;
  }
  return true;
}

Vector start_or_naive(const Dataset& data, const SolverOptions& opts) {
  if (opts.start) {
    if (opts.start->size() != data.p()) throw DimensionError("start vector length differs from p");
    return *opts.start;
  }
  SolverOptions naive_opts = opts;
  naive_opts.start.reset();
  try {
    return fit_naive(data, naive_opts).beta_hat;
  } catch (const SolverError&) {
    return Vector::Zero(data.p());
  }
}

Dataset as_contaminated(const Dataset& data) {
  return Dataset(Matrix(0, data.p()), {}, {}, data.all_x(), data.all_ytilde(),
                 data.has_intercept());
}

FitResult solve_joint(const Dataset& data, Method method, const SolverOptions& opts) {
  const int p = data.p();
  Vector start(p + 2);
  start.head(p) = start_or_naive(data, opts);
  start[p] = 0.1;
  start[p + 1] = 0.1;

  RootSystem sys;
  sys.residual = [&](const Vector& v) { return joint_score(data, v); };
  sys.jacobian = [&](const Vector& v) {
    Matrix j = fd_jacobian(sys.residual, v);
    const MisclassProbs th{v[p], v[p + 1]};
    j.topLeftCorner(p, p) = score_jacobian(data, v.head(p), th);
    return j;
  };
  sys.capped_coords = p;
  SolverOptions o = opts;
  o.start.reset();
  const NewtonResult res = newton_root(sys, start, o);

  FitResult fit;
  fit.method = method;
  fit.beta_hat = res.x.head(p);
  fit.theta_hat = MisclassProbs{res.x[p], res.x[p + 1]};
  fit.converged = true;
  fit.iterations = res.iterations;
  fit.final_score_norm = joint_score(data, res.x).cwiseAbs().maxCoeff();
  if (res.step_cap_hit) add_warning(fit, Warning::StepCapHit);
  const auto outside = [](double t) { return t < 0.0 || t > 1.0; };
  if (outside(fit.theta_hat->theta1) || outside(fit.theta_hat->theta2)) {
    add_warning(fit, Warning::ThetaOutOfUnitInterval);
  }
  return fit;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Naive: return "naive";
    case Method::Pmle: return "pmle";
    case Method::Jmle: return "jmle";
    case Method::Cmle: return "cmle";
  }
  return "unknown";
}

std::string_view to_string(Warning w) {
  switch (w) {
    case Warning::ThetaOutOfUnitInterval: return "THETA_OUT_OF_UNIT_INTERVAL";
    case Warning::NearNonidentifiable: return "NEAR_NONIDENTIFIABLE";
    case Warning::SeparationSuspected: return "SEPARATION_SUSPECTED";
    case Warning::StepCapHit: return "STEP_CAP_HIT";
    case Warning::LargeLinearPredictor: return "LARGE_LINEAR_PREDICTOR";
  }
  return "UNKNOWN";
}

bool FitResult::has_warning(Warning w) const {
  return std::find(warnings.begin(), warnings.end(), w) != warnings.end();
}

FitResult fit_logistic(const Matrix& x, std::span<const std::uint8_t> response,
                       const SolverOptions& opts) {
  checked(opts);
  if (x.rows() < 1) throw EmptySampleError("logistic fit needs at least one row");
  if (static_cast<std::size_t>(x.rows()) != response.size()) {
    throw DimensionError("response length differs from covariate rows");
  }
  Vector start = Vector::Zero(x.cols());
  if (opts.start) {
    if (opts.start->size() != x.cols()) throw DimensionError("start vector length differs from p");
    start = *opts.start;
  }

  bool large_norm = false;
  RootSystem sys;
  sys.residual = [&](const Vector& b) { return logistic_score(x, response, b); };
  sys.jacobian = [&](const Vector& b) { return logistic_jacobian(x, b); };
  sys.on_iterate = [&](const Vector& b) {
    if (b.norm() > kSeparationNorm) large_norm = true;
  };

  const NewtonResult res = newton_root(sys, start, opts);

  FitResult fit;
  fit.method = Method::Naive;
  fit.beta_hat = res.x;
  fit.converged = true;
  fit.iterations = res.iterations;
  fit.final_score_norm = logistic_score(x, response, res.x).cwiseAbs().maxCoeff();
  if (large_norm || perfectly_separated(x, response, res.x)) {
    add_warning(fit, Warning::SeparationSuspected);
  }
  if (res.step_cap_hit) add_warning(fit, Warning::StepCapHit);
  return fit;
}

FitResult fit_naive(const Dataset& data, const SolverOptions& opts) {
  const std::vector<std::uint8_t> yt = data.all_ytilde();
  return fit_logistic(data.all_x(), yt, opts);
}

FitResult fit_pmle_with_theta(const Dataset& data, const MisclassProbs& theta,
                              const SolverOptions& opts) {
  checked(opts);
  require_identifiable(theta);
  const Vector start = start_or_naive(data, opts);

  RootSystem sys;
  sys.residual = [&](const Vector& b) { return score(data, b, theta); };
  sys.jacobian = [&](const Vector& b) { return score_jacobian(data, b, theta); };
  SolverOptions o = opts;
  o.start.reset();
  const NewtonResult res = newton_root(sys, start, o);

  FitResult fit;
  fit.method = Method::Pmle;
  fit.beta_hat = res.x;
  fit.theta_hat = theta;
  fit.converged = true;
  fit.iterations = res.iterations;
  fit.final_score_norm = score(data, res.x, theta).cwiseAbs().maxCoeff();
  if (res.step_cap_hit) add_warning(fit, Warning::StepCapHit);
  return fit;
}

FitResult fit_pmle(const Dataset& data, const SolverOptions& opts) {
  if (data.n1() < 1) throw EmptySampleError("pseudo-likelihood fit needs validation rows");
  const ThetaEstimate est = estimate_theta(data);
  FitResult fit = fit_pmle_with_theta(data, est.theta, opts);
  fit.theta_est = est;
  return fit;
}

Vector joint_score(const Dataset& data, const Vector& params) {
  const int p = data.p();
  if (params.size() != p + 2) throw DimensionError("joint parameter vector must have length p+2");
  const Vector beta = params.head(p);
  const MisclassProbs th{params[p], params[p + 1]};
  if (!(std::abs(1.0 - th.theta1 - th.theta2) > kIdentifiabilityTol)) {
    return Vector::Constant(p + 2, std::numeric_limits<double>::quiet_NaN());
  }

  // An observation with non-positive fitted probability puts the
  // log-likelihood at minus infinity.
  const auto y = data.y();
  const auto ytv = data.validation_ytilde();
  for (int i = 0; i < data.n1(); ++i) {
    const double prob = y[i] == 0 ? (ytv[i] ? th.theta1 : 1.0 - th.theta1)
                                  : (ytv[i] ? 1.0 - th.theta2 : th.theta2);
    if (!(prob > 0.0)) return Vector::Constant(p + 2, std::numeric_limits<double>::quiet_NaN());
  }

  Vector out(p + 2);
  out.head(p) = score(data, beta, th);

  double g1 = 0.0;
  double g2 = 0.0;
  const double v1 = th.theta1 * (1.0 - th.theta1);
  const double v2 = th.theta2 * (1.0 - th.theta2);
  for (int i = 0; i < data.n1(); ++i) {
    if (y[i] == 0) {
      g1 += (ytv[i] - th.theta1) / v1;
    } else {
      g2 += (1.0 - ytv[i] - th.theta2) / v2;
    }
  }
  const Vector un = data.nonvalidation_x() * beta;
  const auto ytn = data.nonvalidation_ytilde();
  for (int i = 0; i < data.n2(); ++i) {
    const LinkTerms t = link_terms(un[i], th);
    if (!((ytn[i] ? t.h3 : t.h3c) > 0.0)) {
      return Vector::Constant(p + 2, std::numeric_limits<double>::quiet_NaN());
    }
    const double resid = ytn[i] - t.h3;
    g1 += t.q_over_h3c / t.h3 * resid;
    g2 -= t.psi_over_h3 / t.h3c * resid;
  }
  out[p] = g1 / data.n();
  out[p + 1] = g2 / data.n();
  return out;
}

FitResult fit_jmle(const Dataset& data, const SolverOptions& opts) {
  checked(opts);
  if (data.n1() < 1) throw EmptySampleError("joint fit needs validation rows");
  return solve_joint(data, Method::Jmle, opts);
}

FitResult fit_cmle(const Dataset& data, const SolverOptions& opts,
                   std::optional<MisclassProbs> fixed_theta) {
  checked(opts);
  const Dataset contaminated = as_contaminated(data);
  FitResult fit;
  if (fixed_theta) {
    fit = fit_pmle_with_theta(contaminated, *fixed_theta, opts);
    fit.method = Method::Cmle;
  } else {
    fit = solve_joint(contaminated, Method::Cmle, opts);
  }

  const Vector u = data.all_x() * fit.beta_hat;
  const auto near_linear = std::count_if(u.data(), u.data() + u.size(), [](double v) {
    const double ps = psi(v);
    return ps > kNearLinearLo && ps < kNearLinearHi;
  });
  if (static_cast<double>(near_linear) > kNearLinearFraction * static_cast<double>(u.size())) {
    add_warning(fit, Warning::NearNonidentifiable);
  }
  return fit;
}

}  // namespace misclassit
