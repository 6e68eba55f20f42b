#include "misclassit/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "misclassit/errors.hpp"

namespace misclassit {

double ThetaBox::m0() const {
  const double lo = std::min(delta1 * (1.0 - delta1), delta2 * (1.0 - delta2));
  return 1.0 / lo;
}

double psi(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double log_psi(double u) {
  if (u >= 0.0) return -std::log1p(std::exp(-u));
  return u - std::log1p(std::exp(u));
}

double log_one_minus_psi(double u) { return log_psi(-u); }

LinkTerms link_terms(double u, const MisclassProbs& theta) {
  const double t1 = theta.theta1;
  const double t2 = theta.theta2;
  LinkTerms t{};
  t.psi = psi(u);
  t.one_minus_psi = psi(-u);
  t.h3 = t1 * t.one_minus_psi + (1.0 - t2) * t.psi;
  t.h3c = (1.0 - t1) * t.one_minus_psi + t2 * t.psi;

  if (u >= 0.0) {
    const double e = std::exp(-u);
    t.psi_over_h3 = 1.0 / (t1 * e + (1.0 - t2));
    t.q_over_h3c = e / ((1.0 - t1) * e + t2);
  } else {
    const double e = std::exp(u);
    t.psi_over_h3 = e / (t1 + (1.0 - t2) * e);
    t.q_over_h3c = 1.0 / ((1.0 - t1) + t2 * e);
  }
  t.d_psi_over_h3 = t.psi_over_h3 * (1.0 - (1.0 - t2) * t.psi_over_h3);
  t.d_q_over_h3c = -t.q_over_h3c * (1.0 - (1.0 - t1) * t.q_over_h3c);
  return t;
}

void require_identifiable(const MisclassProbs& theta, double tol) {
  if (!(std::abs(1.0 - theta.theta1 - theta.theta2) > tol)) {
    std::ostringstream os;
    os << "theta1 + theta2 = " << theta.theta1 + theta.theta2
       << " is within " << tol << " of 1; the surrogate response is uninformative";
    throw IdentifiabilityError(os.str());
  }
}

namespace {

void require_dims(const Vector& beta, const Vector& x) {
  if (beta.size() != x.size()) throw DimensionError("beta and x have different lengths");
}

void require_dims(const Dataset& data, const Vector& beta) {
  if (beta.size() != data.p()) throw DimensionError("beta length differs from dataset p");
}

}  // namespace

Vector h1(const Vector& beta, double y, const Vector& x) {
  require_dims(beta, x);
  return x * (y - psi(x.dot(beta)));
}

double h3(const Vector& beta, const MisclassProbs& theta, const Vector& x) {
  require_dims(beta, x);
  return link_terms(x.dot(beta), theta).h3;
}

Vector h2(const Vector& beta, const MisclassProbs& theta, double ytilde, const Vector& x,
          double tol) {
  require_dims(beta, x);
  require_identifiable(theta, tol);
  const LinkTerms t = link_terms(x.dot(beta), theta);
  const double k = 1.0 - theta.theta1 - theta.theta2;
  return x * (k * t.variance_ratio() * (ytilde - t.h3));
}

double pseudo_loglik(const Dataset& data, const Vector& beta, const MisclassProbs& theta_hat,
                     double tol) {
  require_dims(data, beta);
  require_identifiable(theta_hat, tol);
  const double t1 = theta_hat.theta1;
  const double t2 = theta_hat.theta2;
  auto safe_log = [](double v) {
    if (!(v > 0.0)) throw DomainError("pseudo log-likelihood: non-positive log argument");
    return std::log(v);
  };

  double total = 0.0;
  const Vector uv = data.validation_x() * beta;
  const auto y = data.y();
  const auto ytv = data.validation_ytilde();
  for (int i = 0; i < data.n1(); ++i) {
    if (y[i] == 1) {
      total += (ytv[i] == 1 ? safe_log(1.0 - t2) : safe_log(t2)) + log_psi(uv[i]);
    } else {
      total += (ytv[i] == 1 ? safe_log(t1) : safe_log(1.0 - t1)) + log_one_minus_psi(uv[i]);
    }
  }
  const Vector un = data.nonvalidation_x() * beta;
  const auto ytn = data.nonvalidation_ytilde();
  for (int i = 0; i < data.n2(); ++i) {
    const LinkTerms t = link_terms(un[i], theta_hat);
    total += safe_log(ytn[i] == 1 ? t.h3 : t.h3c);
  }
  return total / data.n();
}

Vector score(const Dataset& data, const Vector& beta, const MisclassProbs& theta_hat,
             double tol) {
  require_dims(data, beta);
  const double k = 1.0 - theta_hat.theta1 - theta_hat.theta2;

  const Vector uv = data.validation_x() * beta;
  Vector rv(data.n1());
  const auto y = data.y();
  for (int i = 0; i < data.n1(); ++i) rv[i] = y[i] - psi(uv[i]);
  Vector total = data.validation_x().transpose() * rv;

  if (data.n2() > 0) {
    require_identifiable(theta_hat, tol);
    const Vector un = data.nonvalidation_x() * beta;
    Vector rn(data.n2());
    const auto ytn = data.nonvalidation_ytilde();
    for (int i = 0; i < data.n2(); ++i) {
      const LinkTerms t = link_terms(un[i], theta_hat);
      rn[i] = k * t.variance_ratio() * (ytn[i] - t.h3);
    }
    total += data.nonvalidation_x().transpose() * rn;
  }
  return total / data.n();
}

Matrix score_jacobian(const Dataset& data, const Vector& beta, const MisclassProbs& theta_hat,
                      double tol) {
  require_dims(data, beta);
  const double k = 1.0 - theta_hat.theta1 - theta_hat.theta2;

  const Vector uv = data.validation_x() * beta;
  Vector wv(data.n1());
  for (int i = 0; i < data.n1(); ++i) {
    const double ps = psi(uv[i]);
    wv[i] = -ps * psi(-uv[i]);
  }
  const Matrix& xv = data.validation_x();
  Matrix total = xv.transpose() * (xv.array().colwise() * wv.array()).matrix();

  if (data.n2() > 0) {
    require_identifiable(theta_hat, tol);
    const Vector un = data.nonvalidation_x() * beta;
    Vector wn(data.n2());
    const auto ytn = data.nonvalidation_ytilde();
    for (int i = 0; i < data.n2(); ++i) {
      const LinkTerms t = link_terms(un[i], theta_hat);
      const double w = k * t.variance_ratio();
      const double dw = k * (t.d_psi_over_h3 * t.q_over_h3c + t.psi_over_h3 * t.d_q_over_h3c);
      const double dh3 = k * t.psi * t.one_minus_psi;
      wn[i] = dw * (ytn[i] - t.h3) - w * dh3;
    }
    const Matrix& xn = data.nonvalidation_x();
    total += xn.transpose() * (xn.array().colwise() * wn.array()).matrix();
  }
  return total / data.n();
}

}  // namespace misclassit
