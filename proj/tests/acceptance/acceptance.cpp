// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "misclassit/asymptotic.hpp"
#include "misclassit/bootstrap.hpp"
#include "misclassit/errors.hpp"
#include "misclassit/estimators.hpp"
#include "misclassit/extensions.hpp"
#include "misclassit/io.hpp"
#include "misclassit/model.hpp"
#include "misclassit/rng.hpp"
#include "misclassit/sim.hpp"
#include "misclassit/theta.hpp"

using namespace misclassit;
using testutil::max_abs;

namespace {

// Collects individual checks; a criterion passes when all of them hold.
class Report {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) {
      ok_ = false;
      failed_.push_back(what);
    }
    std::printf("    %s %s\n", ok ? "ok  " : "FAIL", what.c_str());
  }
  bool ok() const { return ok_; }
  const std::vector<std::string>& failed() const { return failed_; }

 private:
  bool ok_ = true;
  std::vector<std::string> failed_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool within_rel(double value, double target, double rel) {
  return std::abs(value - target) <= rel * std::abs(target);
}

double min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.eigenvalues().minCoeff();
}

bool symmetric(const Matrix& m) { return max_abs(m - m.transpose()) == 0.0; }

int threads() { return resolve_threads(std::nullopt); }

// ---------------------------------------------------------------------------

void ac1(Report& r) {
  Stream s(101, {0});
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int p = 1 + static_cast<int>(s.index(5));
    const int n = 20 + static_cast<int>(s.index(181));
    const int n1 = 1 + static_cast<int>(s.index(static_cast<std::size_t>(n)));
    Vector beta(p);
    for (int j = 0; j < p; ++j) beta[j] = s.normal();
    const Dataset d = testutil::random_dataset(1000 + k, n, n1, p, beta, 0.2 * s.uniform(),
                                               0.3 * s.uniform(), p > 1);
    const MisclassProbs th{0.01 + 0.4 * s.uniform(), 0.01 + 0.4 * s.uniform()};
    Vector b(p);
    for (int j = 0; j < p; ++j) b[j] = s.normal();
    const Vector fd = testutil::fd_gradient([&](const Vector& v) { return pseudo_loglik(d, v, th); }, b);
    worst = std::max(worst, max_abs(score(d, b, th) - fd));
  }
  r.check(worst < 1e-6, fmt("max |score - FD gradient| = %.3g < 1e-6", worst));
}

void ac2(Report& r) {
  const Dataset d = to_dataset(read_csv_file(std::string(MISCLASSIT_TEST_DATA) + "/tiny.csv"), false);
  r.check(d.n() == 30 && d.p() == 1, "tiny fixture has n = 30, p = 1");
  const FitResult f = fit_pmle(d);
  const MisclassProbs th = *f.theta_hat;
  const double g = testutil::golden_section_max(
      [&](double v) { return pseudo_loglik(d, Vector::Constant(1, v), th); }, -10.0, 10.0);
  r.check(std::abs(f.beta_hat[0] - g) <= 1e-4,
          fmt("pmle %.10f vs golden section %.10f", f.beta_hat[0], g));

  const Dataset e = testutil::random_dataset(40, 40, 0, 2, (Vector(2) << 0.4, -1.0).finished(), 0.0, 0.0);
  const Matrix x = e.all_x();
  std::vector<double> y;
  for (auto v : e.all_ytilde()) y.push_back(v);
  const Vector grid = testutil::lattice_max_2d([&](const Vector& b) { return testutil::bernoulli_loglik(x, y, b); });
  const double gap = max_abs(fit_naive(e).beta_hat - grid);
  r.check(gap <= 2e-3, fmt("naive vs lattice search gap %.3g <= 2e-3", gap));
}

void ac3(Report& r) {
  const Vector beta = (Vector(3) << -0.3, 1.0, -0.8).finished();
  const Dataset full = testutil::random_dataset(12, 150, 150, 3, beta, 0.2, 0.1);
  std::vector<double> y(full.y().begin(), full.y().end());
  const double g1 = max_abs(fit_pmle(full).beta_hat - testutil::irls_logistic(full.validation_x(), y));
  r.check(g1 <= 1e-8, fmt("f = 1: pmle vs logistic MLE gap %.3g <= 1e-8", g1));

  const Dataset d = testutil::random_dataset(1, 200, 50, 3, beta, 0.1, 0.25);
  const GroupedFit gf = fit_pmle_grouped(GroupedDataset({d}));
  const double g2 = max_abs(gf.fit.beta_hat - fit_pmle(d).beta_hat);
  r.check(g2 <= 1e-10, fmt("K = 1: grouped vs base gap %.3g <= 1e-10", g2));

  SimModel m;
  m.beta0 = (Vector(3) << -0.5, 1.5, -1.0).finished();
  m.theta0 = {0.15, 0.0};
  m.covariates = {{CovariateSpec::Family::Intercept},
                  {CovariateSpec::Family::Uniform, -1.0, 1.0},
                  {CovariateSpec::Family::Uniform, 0.0, 2.0, 1.0}};
  Stream s(15, {0});
  const Dataset o = generate_dataset(m, 800, 200, s);
  const FitResult z = fit_pmle_theta2_zero(o);
  const FitResult forced = fit_pmle_with_theta(o, {estimate_theta(o).theta.theta1, 0.0});
  r.check(z.beta_hat == forced.beta_hat, "theta2 = 0 path equals the forced-theta path exactly");
}

void ac4(Report& r) {
  SimConfig cfg;
  cfg.n = 300;
  cfg.f_n = 0.2;
  cfg.reps = 250;
  cfg.seed = 4;
  cfg.threads = threads();
  const BiasMseSummary s = run_bias_mse_study({0.9}, cfg);
  const EtaSummary& row = s.rows.front();
  const EstimateStats& p = row.method(Method::Pmle).beta1;
  const EstimateStats& j = row.method(Method::Jmle).beta1;
  const EstimateStats& c = row.method(Method::Cmle).beta1;
  const EstimateStats& nv = row.method(Method::Naive).beta1;
  r.check(std::abs(p.bias - 0.0178) <= 0.05, fmt("pmle bias %.4f within 0.0178 +- 0.05", p.bias));
  r.check(within_rel(p.mse, 0.0842, 0.5), fmt("pmle mse %.4f within 0.0842 +- 50%%", p.mse));
  r.check(nv.bias <= -0.35, fmt("naive bias %.4f <= -0.35", nv.bias));
  r.check(p.mse < j.mse && j.mse < c.mse,
          fmt("mse ordering pmle %.4f < jmle %.4f < cmle %.4f", p.mse, j.mse, c.mse));
}

void ac5(Report& r) {
  SimConfig cfg;
  cfg.n = 600;
  cfg.f_n = 0.2;
  cfg.reps = 250;
  cfg.B = 400;
  cfg.seed = 5;
  cfg.threads = threads();
  const CoverageSummary s = run_coverage_study(model_a(), cfg);
  const double acov[] = {0.952, 0.940, 0.964, 0.980};
  const double bcov[] = {0.956, 0.956, 0.964, 0.996};
  const double alen[] = {0.944, 0.643, 1.364, 1.958};
  const double blen[] = {0.902, 0.67, 1.353, 2.035};
  for (int j = 0; j < 4; ++j) {
    const auto& a = s.asymptotic[static_cast<std::size_t>(j)];
    const auto& b = s.bootstrap[static_cast<std::size_t>(j)];
    const std::string tag = "beta" + std::to_string(j + 1) + " ";
    r.check(std::abs(a.coverage - acov[j]) <= 0.04,
            tag + fmt("asymptotic coverage %.3f within %.3f +- 0.04", a.coverage, acov[j]));
    r.check(std::abs(b.coverage - bcov[j]) <= 0.05,
            tag + fmt("bootstrap coverage %.3f within %.3f +- 0.05", b.coverage, bcov[j]));
    r.check(within_rel(a.avg_length, alen[j], 0.25),
            tag + fmt("asymptotic length %.3f within %.3f +- 25%%", a.avg_length, alen[j]));
    r.check(within_rel(b.avg_length, blen[j], 0.25),
            tag + fmt("bootstrap length %.3f within %.3f +- 25%%", b.avg_length, blen[j]));
  }
  r.check(s.fit_failures == 0 && s.covariance_failures == 0,
          fmt("fit failures %.0f, covariance failures %.0f", s.fit_failures, s.covariance_failures));
}

void ac6(Report& r) {
  const double a0 = 0.5, t1 = 0.1, t2 = 0.3;
  const int n1 = 500, reps = 2000;
  const double pi1 = (1 - a0) * (1 - t1), pi2 = a0 * t2, pi3 = (1 - a0) * t1;
  const Eigen::Matrix<double, 2, 3> b = b0(a0, pi2, pi3);
  const Eigen::Matrix2d target = b * sigma22(a0, pi2, pi3) * b.transpose();
  (void)pi1;

  std::vector<Eigen::Vector2d> z(reps);
  parallel_for(reps, threads(), [&](std::size_t k) {
    Stream s(6, {k});
    CellCounts c;
    for (int i = 0; i < n1; ++i) {
      const bool y = s.uniform() < a0;
      const bool flip = s.uniform() < (y ? t2 : t1);
      const bool yt = y != flip;
      (yt ? (y ? c.n11 : c.n10) : (y ? c.n01 : c.n00))++;
    }
    const ThetaEstimate e = estimate_theta(c);
    z[k] = std::sqrt(double(n1)) * Eigen::Vector2d(e.theta.theta1 - t1, e.theta.theta2 - t2);
  });
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& v : z) mean += v;
  mean /= reps;
  Eigen::Matrix2d emp = Eigen::Matrix2d::Zero();
  for (const auto& v : z) emp += (v - mean) * (v - mean).transpose();
  emp /= reps - 1;

  for (int i = 0; i < 2; ++i) {
    r.check(within_rel(emp(i, i), target(i, i), 0.15),
            fmt("var %.0f: Monte Carlo %.5f vs asymptotic %.5f (15%%)", i + 1, emp(i, i), target(i, i)));
  }
  // The off-diagonal target is zero, so it is judged relative to the scale.
  const double scale = std::sqrt(target(0, 0) * target(1, 1));
  r.check(std::abs(emp(0, 1) - target(0, 1)) <= 0.15 * scale,
          fmt("cov: Monte Carlo %.5f vs asymptotic %.5f (15%% of scale %.5f)", emp(0, 1),
              target(0, 1), scale));
}

void ac7(Report& r) {
  Stream s(7, {0});
  const Dataset d = generate_dataset(model_a(), 600, 120, s);
  const FitResult f = fit_pmle(d);
  const CovarianceBundle cb = estimate_bundle(d, f.beta_hat, *f.theta_est);
  BootstrapConfig bc;
  bc.B = 2000;
  bc.seed = 77;
  bc.threads = threads();
  const BootstrapDraws draws = run_bootstrap(d, f.beta_hat, {}, bc);
  const Vector t = std::sqrt(600.0) * (draws.beta_star.col(1).array() - f.beta_hat[1]).matrix();
  const double m = t.mean();
  const double sd = std::sqrt((t.array() - m).square().sum() / (t.size() - 1));
  const double plug = std::sqrt(600.0 * cb.beta_cov(1, 1));
  r.check(within_rel(sd, plug, 0.2), fmt("bootstrap sd %.4f vs plug-in sd %.4f (20%%)", sd, plug));
  r.check(draws.count(ReplicateStatus::Ok) >= 1900,
          fmt("successful replicates %.0f of 2000", draws.count(ReplicateStatus::Ok)));
}

void ac8(Report& r) {
  const ThetaBox box;
  Stream s(8, {0});
  double lo = INFINITY, hi = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const MisclassProbs th{box.delta1 + (box.delta2 - box.delta1) * s.uniform(),
                           box.delta1 + (box.delta2 - box.delta1) * s.uniform()};
    if (!box.contains(th) || std::abs(1.0 - th.theta1 - th.theta2) < kIdentifiabilityTol) continue;
    const Eigen::Vector3d x(1.0, 5.0 * s.normal(), 5.0 * s.normal());
    const Eigen::Vector3d b(3.0 * s.normal(), 3.0 * s.normal(), 3.0 * s.normal());
    const LinkTerms t = link_terms(x.dot(b), th);
    const double inv = 1.0 / (t.h3 * t.h3c);
    lo = std::min(lo, inv);
    hi = std::max(hi, inv);
  }
  r.check(lo >= 4.0 - 1e-12 && hi < box.m0(),
          fmt("1/(h3(1-h3)) in [%.4f, %.4g], bound %.4g", lo, hi, box.m0()));

  bool sym = true, psd = true, negdef = true;
  for (int k = 0; k < 20; ++k) {
    Stream g(80, {static_cast<std::uint64_t>(k)});
    const Dataset d = generate_dataset(model_a(), 600, 120, g);
    const FitResult f = fit_pmle(d);
    const CovarianceBundle cb = estimate_bundle(d, f.beta_hat, *f.theta_est);
    const Matrix s22 = cb.Sigma22;
    for (const Matrix* m : {&cb.Sigma0, &cb.Sigma11, &cb.Gamma, &s22, &cb.beta_cov}) {
      sym = sym && symmetric(*m);
      psd = psd && min_eig(*m) >= -1e-12 * std::max(1.0, max_abs(*m));
    }
    negdef = negdef && symmetric(cb.Zdot) && min_eig(-cb.Zdot) > 0.0;
  }
  r.check(sym, "Sigma0, Sigma11, Gamma, Sigma22 symmetric on 20 model (a) plug-ins");
  r.check(psd, "Sigma0, Sigma11, Gamma, Sigma22 PSD on 20 model (a) plug-ins");
  r.check(negdef, "Zdot negative definite on 20 model (a) plug-ins");

  SimConfig cfg;
  cfg.reps = 20;
  cfg.seed = 81;
  const BiasMseSummary a = run_bias_mse_study({0.7}, cfg);
  cfg.threads = 4;
  const BiasMseSummary b = run_bias_mse_study({0.7}, cfg);
  double gap = 0.0;
  bool same = true;
  for (std::size_t m = 0; m < a.rows[0].methods.size(); ++m) {
    const EstimateStats& e = a.rows[0].methods[m].beta1;
    gap = std::max(gap, std::abs(e.mse - (e.variance + e.bias * e.bias)));
    same = same && e.values == b.rows[0].methods[m].beta1.values;
  }
  r.check(gap < 1e-12, fmt("bias^2 + var = mse, max gap %.3g", gap));
  r.check(same, "bias study identical with 1 and 4 threads");

  Stream g(82, {0});
  const Dataset d = generate_dataset(model_a(), 300, 60, g);
  BootstrapConfig bc;
  bc.B = 100;
  bc.seed = 83;
  const BootstrapDraws d1 = run_bootstrap(d, {}, bc);
  bc.threads = 4;
  const BootstrapDraws d4 = run_bootstrap(d, {}, bc);
  r.check(d1.beta_star == d4.beta_star && d1.theta_star == d4.theta_star,
          "bootstrap identical with 1 and 4 threads");

  SimConfig cc;
  cc.n = 300;
  cc.reps = 8;
  cc.B = 30;
  cc.seed = 84;
  const CoverageSummary c1 = run_coverage_study(model_a(), cc);
  cc.threads = 4;
  const CoverageSummary c4 = run_coverage_study(model_a(), cc);
  bool cov_same = true;
  for (std::size_t j = 0; j < c1.asymptotic.size(); ++j) {
    cov_same = cov_same && c1.asymptotic[j].avg_length == c4.asymptotic[j].avg_length &&
               c1.bootstrap[j].avg_length == c4.bootstrap[j].avg_length &&
               c1.bootstrap[j].coverage == c4.bootstrap[j].coverage;
  }
  r.check(cov_same, "coverage study identical with 1 and 4 threads");
}

void ac9(Report& r) {
  SimConfig cfg;
  cfg.n = 300;
  cfg.f_n = 0.2;
  cfg.reps = 100;
  cfg.seed = 9;
  cfg.threads = threads();
  const BiasMseSummary s = run_bias_mse_study({0.6}, cfg);
  const EtaSummary& row = s.rows.front();
  const double p = row.method(Method::Pmle).beta1.mse;
  const double c = row.method(Method::Cmle).beta1.mse;
  r.check(c >= 10.0 * p, fmt("cmle mse %.4f >= 10 x pmle mse %.4f", c, p));
  const auto& th = row.method(Method::Cmle).theta1;
  int outside = 0;
  if (th) {
    for (double v : th->values) outside += (v < 0.0 || v > 1.0);
  }
  r.check(outside >= 1, fmt("cmle theta1 outside [0, 1] in %.0f replicates", outside));
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    const char* title;
    void (*run)(Report&);
  };
  const Criterion all[] = {
      {"AC1", "score matches the finite-difference gradient", ac1},
      {"AC2", "oracle equivalence on small fixtures", ac2},
      {"AC3", "reduction identities", ac3},
      {"AC4", "eta = 0.9 bias and MSE", ac4},
      {"AC5", "model (a) coverage, n = 600", ac5},
      {"AC6", "theta estimator covariance", ac6},
      {"AC7", "bootstrap sd vs plug-in sd", ac7},
      {"AC8", "structural invariants", ac8},
      {"AC9", "joint estimator without validation data", ac9},
  };
  int failures = 0;
  std::vector<std::string> summary;
  for (const auto& c : all) {
    std::printf("%s %s\n", c.name, c.title);
    std::fflush(stdout);
    Report r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(r);
    } catch (const std::exception& e) {
      r.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string line = std::string(c.name) + (r.ok() ? " PASS" : " FAIL") + " (" +
                             fmt("%.1f s", secs) + ")";
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    summary.push_back(line);
    failures += !r.ok();
  }
  std::printf("\n");
  for (const auto& s : summary) std::printf("%s\n", s.c_str());
  return failures == 0 ? 0 : 1;
}
