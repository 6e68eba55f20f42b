#include "misclassit/asymptotic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "misclassit/errors.hpp"
#include "misclassit/model.hpp"

namespace misclassit {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kA0Margin = 1e-6;

double poly(const std::array<double, 8>& c, double r) {
  double v = c[7];
  for (int i = 6; i >= 0; --i) v = v * r + c[i];
  return v;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double z_for(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must be in (0,1)");
  return normal_quantile(0.5 * (1.0 + level));
}

}  // namespace

double normal_quantile(double p) {
  static constexpr std::array<double, 8> a = {
      3.387132872796366608,   133.14166789178437745, 1971.5909503065514427,
      13731.693765509461125,  45921.953931549871457, 67265.770927008700853,
      33430.575583588128105,  2509.0809287301226727};
  static constexpr std::array<double, 8> b = {
      1.0,                    42.313330701600911252, 687.1870074920579083,
      5394.1960214247511077,  21213.794301586595867, 39307.89580009271061,
      28729.085735721942674,  5226.495278852545925};
  static constexpr std::array<double, 8> c = {
      1.42343711074968357734,   4.6303378461565452959,    5.7694972214606914055,
      3.64784832476320460504,   1.27045825245236838258,   0.24178072517745061177,
      0.0227238449892691845833, 7.7454501427834140764e-4};
  static constexpr std::array<double, 8> d = {
      1.0,                       2.05319162663775882187,    1.6763848301838038494,
      0.68976733498510000455,    0.14810397642748007459,    0.0151986665636164571966,
      5.475938084995344946e-4,   1.05075007164441684324e-9};
  static constexpr std::array<double, 8> e = {
      6.6579046435011037772,     5.4637849111641143699,     1.7848265399172913358,
      0.29656057182850489123,    0.026532189526576123093,   0.0012426609473880784386,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr std::array<double, 8> f = {
      1.0,                       0.59983220655588793769,    0.13692988092273580531,
      0.0148753612908506148525,  7.868691311456132591e-4,   1.8463183175100546818e-5,
      1.4215117583164458887e-7,  2.04426310338993978564e-15};

  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0,1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(a, r) / poly(b, r);
  }
  double r = std::sqrt(-std::log(std::min(p, 1.0 - p)));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = poly(c, r) / poly(d, r);
  } else {
    r -= 5.0;
    v = poly(e, r) / poly(f, r);
  }
  return q < 0.0 ? -v : v;
}

CovarianceBundle plugin_moments(const Matrix& x, const Vector& beta, const MisclassProbs& theta) {
  if (x.cols() != beta.size()) throw DimensionError("beta length differs from covariate columns");
  if (x.rows() < 1) throw EmptySampleError("no covariate rows");
  require_identifiable(theta);
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const double k = 1.0 - theta.theta1 - theta.theta2;

  const Vector u = x * beta;
  Vector w11(n), wg(n), wa1(n), wa2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const LinkTerms t = link_terms(u[i], theta);
    const double v = t.psi * t.one_minus_psi;
    const double q = t.variance_ratio();
    w11[i] = v;
    wg[i] = v * q;
    wa1[i] = t.one_minus_psi * q;
    wa2[i] = t.psi * q;
  }
  const double dn = static_cast<double>(n);

  CovarianceBundle b;
  b.Sigma11 = symmetrized(x.transpose() * (x.array().colwise() * w11.array()).matrix() / dn);
  b.Gamma = symmetrized(k * k * x.transpose() * (x.array().colwise() * wg.array()).matrix() / dn);

  const Vector m = x.transpose() * w11 / dn;
  b.Sigma21.resize(3, p);
  b.Sigma21.row(0) = -(1.0 - theta.theta1) * m.transpose();
  b.Sigma21.row(1) = theta.theta2 * m.transpose();
  b.Sigma21.row(2) = -theta.theta1 * m.transpose();

  b.A0.resize(p, 2);
  b.A0.col(0) = -k * x.transpose() * wa1 / dn;
  b.A0.col(1) = k * x.transpose() * wa2 / dn;
  return b;
}

void assemble_sigma0(CovarianceBundle& b, double f, const ThetaEstimate& est, bool theta2_zero) {
  if (!(f > 0.0 && f <= 1.0)) throw DomainError("validation fraction must be in (0,1]");
  const double a0 = est.a0_hat;
  const bool interior = a0 > kA0Margin && a0 < 1.0 - kA0Margin;
  b.f_used = f;
  b.Zdot = symmetrized(-f * b.Sigma11 - (1.0 - f) * b.Gamma);

  if (!interior) {
    if (f < 1.0) throw DegenerateError("a0_hat is on the boundary of (0,1)");
    b.Sigma22.setZero();
    b.B0.setZero();
    b.theta_block.setZero();
    b.Sigma0 = b.Sigma11;
    return;
  }
  b.Sigma22 = sigma22(a0, est.pi_hat[1], est.pi_hat[2]);
  b.B0 = b0(a0, est.pi_hat[1], est.pi_hat[2]);
  if (theta2_zero) b.B0.row(1).setZero();
  b.theta_block = b.B0 * b.Sigma22 * b.B0.transpose();
  b.theta_block(1, 0) = b.theta_block(0, 1);

  const Matrix ab = b.A0 * b.B0;
  const Matrix cross = ab * b.Sigma21;
  const double g = 1.0 - f;
  Matrix s0 = f * b.Sigma11 + g * (cross + cross.transpose()) +
              (g * g / f) * (b.A0 * b.theta_block * b.A0.transpose()) + g * b.Gamma;
  b.Sigma0 = symmetrized(s0);
}

void finish_beta_cov(CovarianceBundle& b, int n) {
  if (n < 1) throw DomainError("sample size must be positive");
  b.n = n;
  if (!b.Zdot.allFinite()) throw SingularZdot("plug-in Zdot is not finite");
  const Vector sv = Eigen::JacobiSVD<Matrix>(b.Zdot).singularValues();
  if (!(sv[sv.size() - 1] * kMaxCondition >= sv[0])) {
    throw SingularZdot("plug-in Zdot is singular or ill-conditioned");
  }
  const Matrix zi = b.Zdot.fullPivLu().inverse();
  b.beta_cov = symmetrized(zi * b.Sigma0 * zi.transpose() / static_cast<double>(n));
}

CovarianceBundle estimate_bundle(const Dataset& data, const Vector& beta_hat,
                                 const ThetaEstimate& theta_est) {
  if (data.n1() < 1) throw EmptySampleError("covariance needs validation rows");
  CovarianceBundle b = plugin_moments(data.all_x(), beta_hat, theta_est.theta);
  assemble_sigma0(b, data.f_n(), theta_est);
  finish_beta_cov(b, data.n());
  return b;
}

std::vector<Interval> wald_ci(const CovarianceBundle& bundle, const Vector& beta_hat,
                              double level) {
  if (bundle.beta_cov.rows() != beta_hat.size()) throw DimensionError("beta_cov shape mismatch");
  const double z = z_for(level);
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(beta_hat.size()));
  for (Eigen::Index j = 0; j < beta_hat.size(); ++j) {
    const double half = z * std::sqrt(std::max(0.0, bundle.beta_cov(j, j)));
    out.push_back({beta_hat[j] - half, beta_hat[j] + half});
  }
  return out;
}

Interval linear_functional_ci(const CovarianceBundle& bundle, const Vector& beta_hat,
                              const Vector& c, double level) {
  if (c.size() != beta_hat.size()) throw DimensionError("c length differs from p");
  if (c.isZero(0.0)) throw DomainError("c must be non-zero");
  const double z = z_for(level);
  const double center = c.dot(beta_hat);
  const double half = z * std::sqrt(std::max(0.0, c.dot(bundle.beta_cov * c)));
  return {center - half, center + half};
}

Interval risk_ci_delta(const CovarianceBundle& bundle, const Vector& beta_hat, const Vector& x0,
                       double level) {
  if (x0.size() != beta_hat.size()) throw DimensionError("x0 length differs from p");
  if (x0.isZero(0.0)) throw DomainError("x0 must be non-zero");
  const double z = z_for(level);
  const double u = x0.dot(beta_hat);
  const double center = psi(u);
  const Vector g = psi(u) * psi(-u) * x0;
  const double half = z * std::sqrt(std::max(0.0, g.dot(bundle.beta_cov * g)));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace misclassit
