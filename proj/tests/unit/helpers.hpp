#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "misclassit/dataset.hpp"
#include "misclassit/rng.hpp"

namespace testutil {

using misclassit::Dataset;
using misclassit::Matrix;
using misclassit::Vector;

// Logistic data with misclassified surrogates; x has an optional intercept
// column followed by standard normals.
inline Dataset random_dataset(std::uint64_t seed, int n, int n1, int p, const Vector& beta,
                              double theta1, double theta2, bool intercept = true) {
  misclassit::Stream s(seed, {99});
  Matrix x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = (intercept && j == 0) ? 1.0 : s.normal();
  }
  std::vector<std::uint8_t> y(n), yt(n);
  for (int i = 0; i < n; ++i) {
    const double pr = 1.0 / (1.0 + std::exp(-x.row(i).dot(beta)));
    const bool yi = s.uniform() < pr;
    const bool flip = s.uniform() < (yi ? theta2 : theta1);
    y[i] = yi;
    yt[i] = yi != flip;
  }
  return Dataset(x.topRows(n1), std::vector<std::uint8_t>(y.begin(), y.begin() + n1),
                 std::vector<std::uint8_t>(yt.begin(), yt.begin() + n1), x.bottomRows(n - n1),
                 std::vector<std::uint8_t>(yt.begin() + n1, yt.end()), intercept);
}

// Central differences of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-5 * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    const double fp = f(xp);
    xp[j] = x[j] - h;
    const double fm = f(xp);
    xp[j] = x[j];
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Richardson-extrapolated central differences of a vector function.
inline Matrix fd_jacobian_fine(const std::function<Vector(const Vector&)>& f, const Vector& x) {
  const Vector f0 = f(x);
  Matrix j(f0.size(), x.size());
  Vector xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    auto central = [&](double h) {
      xp[k] = x[k] + h;
      const Vector fp = f(xp);
      xp[k] = x[k] - h;
      const Vector fm = f(xp);
      xp[k] = x[k];
      return Vector((fp - fm) / (2.0 * h));
    };
    const double h = 1e-3 * (1.0 + std::abs(x[k]));
    j.col(k) = (4.0 * central(h / 2.0) - central(h)) / 3.0;
  }
  return j;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Plain logistic MLE by iteratively reweighted least squares.
inline Vector irls_logistic(const Matrix& x, const std::vector<double>& y) {
  Vector b = Vector::Zero(x.cols());
  for (int it = 0; it < 200; ++it) {
    Vector mu(x.rows()), w(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      mu[i] = 1.0 / (1.0 + std::exp(-x.row(i).dot(b)));
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    Vector r(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) r[i] = y[static_cast<std::size_t>(i)] - mu[i];
    const Matrix h = x.transpose() * w.asDiagonal() * x;
    const Vector step = h.ldlt().solve(x.transpose() * r);
    b += step;
    if (step.cwiseAbs().maxCoeff() < 1e-14) break;
  }
  return b;
}

// Maximizer of a unimodal function on [lo, hi].
inline double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                 double tol = 1e-10) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Bernoulli log-likelihood of y on x at b.
inline double bernoulli_loglik(const Matrix& x, const std::vector<double>& y, const Vector& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double u = x.row(i).dot(b);
    const double lp = u >= 0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
    s += y[static_cast<std::size_t>(i)] * lp + (1.0 - y[static_cast<std::size_t>(i)]) * (lp - u);
  }
  return s;
}

// Two-dimensional lattice search: a coarse pass over [-6, 6]^2, then the
// 1e-3 lattice in a window around the coarse winner. The log-likelihood is
// concave, so the window contains the lattice maximizer.
inline Vector lattice_max_2d(const std::function<double(const Vector&)>& f) {
  const auto scan = [&](Vector centre, double half, double step) {
    const int m = static_cast<int>(std::lround(half / step));
    Vector b(2);
    Vector arg = centre;
    double top = -INFINITY;
    for (int i = -m; i <= m; ++i) {
      for (int j = -m; j <= m; ++j) {
        b << centre[0] + i * step, centre[1] + j * step;
        const double v = f(b);
        if (v > top) {
          top = v;
          arg = b;
        }
      }
    }
    return arg;
  };
  const Vector coarse = scan(Vector::Zero(2), 6.0, 0.05);
  return scan(coarse, 0.2, 1e-3);
}

}  // namespace testutil
