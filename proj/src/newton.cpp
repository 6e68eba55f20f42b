#include "misclassit/newton.hpp"

#include <cmath>
#include <limits>

#include "misclassit/errors.hpp"

namespace misclassit {

namespace {

constexpr double kMinRcond = 1e-12;
constexpr int kMaxHalvings = 30;

// Smallest over largest singular value; LU-based estimates miss exact zeros.
double reciprocal_condition(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  return sv.size() == 0 || !(sv[0] > 0.0) ? 0.0 : sv[sv.size() - 1] / sv[0];
}

double max_norm(const Eigen::VectorXd& r) {
  return r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff();
}

}  // namespace

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw DomainError("solver tol must be positive");
  if (max_iter < 1) throw DomainError("solver max_iter must be >= 1");
  if (!(damping > 0.0 && damping < 1.0)) throw DomainError("solver damping must be in (0,1)");
  if (!(max_step > 0.0)) throw DomainError("solver max_step must be positive");
}

NewtonResult newton_root(const RootSystem& system, const Eigen::VectorXd& start,
                         const SolverOptions& opts) {
  opts.validate();
  NewtonResult out;
  out.x = start;
  Eigen::VectorXd r = system.residual(out.x);
  if (r.size() != start.size()) throw DimensionError("residual dimension differs from start");
  if (!r.allFinite()) {
    throw NonConvergence("residual is not finite at the starting point", out.x, 0,
                         std::numeric_limits<double>::infinity());
  }

  for (int it = 0; it < opts.max_iter; ++it) {
    out.residual_norm = max_norm(r);
    if (out.residual_norm <= opts.tol) {
      out.iterations = it;
      return out;
    }
    const Eigen::MatrixXd j = system.jacobian(out.x);
    if (j.rows() != r.size() || j.cols() != out.x.size()) {
      throw DimensionError("Jacobian dimension mismatch");
    }
    if (!j.allFinite()) {
      throw SingularJacobian("Jacobian is not finite", out.x, it, out.residual_norm);
    }
    if (!(reciprocal_condition(j) >= kMinRcond)) {
      throw SingularJacobian("Jacobian is numerically singular", out.x, it, out.residual_norm);
    }
    Eigen::VectorXd step = -Eigen::PartialPivLU<Eigen::MatrixXd>(j).solve(r);
    const Eigen::Index nc = system.capped_coords > 0 ? system.capped_coords : step.size();
    const double len = step.head(nc).norm();
    if (len > opts.max_step) {
      step *= opts.max_step / len;
      out.step_cap_hit = true;
    }

    const double r0 = r.norm();
    Eigen::VectorXd x_new = out.x + step;
    Eigen::VectorXd r_new = system.residual(x_new);
    for (int h = 0; h < kMaxHalvings; ++h) {
      if (r_new.allFinite() && r_new.norm() < r0) break;
      step *= opts.damping;
      x_new = out.x + step;
      r_new = system.residual(x_new);
    }
    if (!r_new.allFinite()) {
      throw NonConvergence("residual became non-finite along every trial step", out.x, it + 1,
                           out.residual_norm);
    }
    out.x = std::move(x_new);
    r = std::move(r_new);
    if (system.on_iterate) system.on_iterate(out.x);
  }
  out.residual_norm = max_norm(r);
  if (out.residual_norm <= opts.tol) {
    out.iterations = opts.max_iter;
    return out;
  }
  throw NonConvergence("Newton iteration did not converge", out.x, opts.max_iter,
                       out.residual_norm);
}

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac;
  Eigen::VectorXd xp = x;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = rel_step * (1.0 + std::abs(x[k]));
    xp[k] = x[k] + h;
    const Eigen::VectorXd fp = f(xp);
    xp[k] = x[k] - h;
    const Eigen::VectorXd fm = f(xp);
    xp[k] = x[k];
    if (k == 0) jac.resize(fp.size(), n);
    jac.col(k) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

}  // namespace misclassit
