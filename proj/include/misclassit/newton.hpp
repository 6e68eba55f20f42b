#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>

namespace misclassit {

struct SolverOptions {
  /// Convergence threshold on the max-norm of the residual.
  double tol = 1e-8;
  int max_iter = 100;
  /// Starting point; estimators fall back to the naive fit when empty.
  std::optional<Eigen::VectorXd> start;
  /// Step contraction factor used by the backtracking line search.
  double damping = 0.5;
  /// Cap on the Euclidean length of a single Newton step.
  double max_step = 10.0;

  /// Throws DomainError if any field is out of range.
  void validate() const;
};

/// A square nonlinear system r(x) = 0 with its Jacobian.
struct RootSystem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
  /// Optional hook run on every accepted iterate (e.g. separation checks).
  std::function<void(const Eigen::VectorXd&)> on_iterate;
  /// Number of leading coordinates that count towards the max_step cap;
  /// 0 means all of them.
  Eigen::Index capped_coords = 0;
};

struct NewtonResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual_norm = 0.0;
  bool step_cap_hit = false;
};

/// Damped Newton iteration. Throws SingularJacobian when the Jacobian is
/// numerically singular (reciprocal condition below 1e-12) and
/// NonConvergence after opts.max_iter iterations.
NewtonResult newton_root(const RootSystem& system, const Eigen::VectorXd& start,
                         const SolverOptions& opts);

/// Central-difference Jacobian, used for blocks without a closed form.
Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double rel_step = 1e-6);

}  // namespace misclassit
