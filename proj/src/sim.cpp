#include "misclassit/sim.hpp"

#include <cmath>
#include <numeric>

#include "misclassit/bootstrap.hpp"
#include "misclassit/errors.hpp"
#include "misclassit/model.hpp"

namespace misclassit {

namespace {

using Family = CovariateSpec::Family;

constexpr double kMaxEta = 0.97;
constexpr double kRawThetaLimit = 10.0;

enum StreamTag : std::uint64_t { kDataTag = 0, kBootstrapTag = 1 };

std::vector<CovariateSpec> mixed_covariates() {
  return {
      {Family::Intercept},
      {Family::LogNormal, 0.0, 1.0, std::exp(0.5)},
      {Family::Bernoulli, 1.0 / 3.0, 0.0, 1.0 / 3.0},
      {Family::Uniform, 0.0, 1.0, 0.5},
  };
}

double poisson(Stream& s, double mean) {
  const double u = s.uniform();
  double prob = std::exp(-mean);
  double cdf = prob;
  int k = 0;
  while (u > cdf && k < 10000) {
    ++k;
    prob *= mean / k;
    cdf += prob;
  }
  return k;
}

// (beta, theta1) from one fit. Failed fits keep their last iterate only
// under raw aggregation.
struct Outcome {
  std::optional<Vector> params;
  bool failed = false;
};

Outcome run_method(Method m, const Dataset& data, const SolverOptions& opts, bool raw) {
  Outcome out;
  try {
    FitResult fit;
    switch (m) {
      case Method::Naive: fit = fit_naive(data, opts); break;
      case Method::Pmle: fit = fit_pmle(data, opts); break;
      case Method::Jmle: fit = fit_jmle(data, opts); break;
      case Method::Cmle: fit = fit_cmle(data, opts); break;
    }
    Vector v(fit.beta_hat.size() + 1);
    v.head(fit.beta_hat.size()) = fit.beta_hat;
    v[fit.beta_hat.size()] = fit.theta_hat ? fit.theta_hat->theta1 : std::nan("");
    if (!raw && fit.theta_hat && std::abs(fit.theta_hat->theta1) > kRawThetaLimit) {
      out.failed = true;
      return out;
    }
    out.params = v;
  } catch (const SolverError& e) {
    out.failed = true;
    if (raw && e.last_iterate().allFinite()) {
      const Vector& li = e.last_iterate();
      const int p = data.p();
      Vector v(p + 1);
      v.head(p) = li.head(p);
      v[p] = li.size() >= p + 2 ? li[p] : std::nan("");
      if (m == Method::Pmle) v[p] = estimate_theta(data).theta.theta1;
      out.params = v;
    }
  } catch (const Error&) {
    out.failed = true;
  }
  return out;
}

}  // namespace

std::string_view to_string(ModelName m) {
  switch (m) {
    case ModelName::ModelA: return "a";
    case ModelName::ModelB: return "b";
    case ModelName::ModelC: return "c";
    case ModelName::P9: return "p9";
    case ModelName::EtaDesign: return "eta";
    case ModelName::Custom: return "custom";
  }
  return "custom";
}

int SimModel::p() const {
  int p = 0;
  for (const auto& c : covariates) p += c.columns();
  return p;
}

bool SimModel::has_intercept() const {
  return !covariates.empty() && covariates.front().family == Family::Intercept;
}

SimModel model_a() {
  SimModel m;
  m.name = ModelName::ModelA;
  m.beta0 = (Vector(4) << 0.0, 0.7, 1.5, -0.6).finished();
  m.theta0 = {0.1, 0.3};
  m.covariates = mixed_covariates();
  return m;
}

SimModel model_b() {
  SimModel m = model_a();
  m.name = ModelName::ModelB;
  m.theta0 = {0.1, 0.1};
  return m;
}

SimModel model_c() {
  SimModel m = model_a();
  m.name = ModelName::ModelC;
  m.beta0[0] = -1.0;
  return m;
}

SimModel model_p9() {
  SimModel m;
  m.name = ModelName::P9;
  m.beta0 = (Vector(9) << -1.0, 0.7, 1.5, -0.6, 1.0, -0.75, -2.0, -1.5, 1.0).finished();
  m.theta0 = {0.1, 0.3};
  m.covariates = mixed_covariates();
  m.covariates.push_back({Family::BivariateNormal, 0.6});
  m.covariates.push_back({Family::Poisson, 3.0, 0.0, 3.0});
  m.covariates.push_back({Family::ChiSquare2, 0.0, 0.0, 2.0});
  m.covariates.push_back({Family::NormalMixture, 0.0, 0.0, 1.0});
  return m;
}

SimModel eta_design(double eta) {
  SimModel m;
  m.name = ModelName::EtaDesign;
  m.beta0 = (Vector(2) << 1.0, 2.0).finished();
  m.theta0 = {0.1, 0.3};
  m.covariates = {{Family::Normal, 0.0, 1.0}, {Family::Normal, 0.0, sigma_of_eta(eta)}};
  return m;
}

int SimConfig::n1() const { return static_cast<int>(std::lround(n * f_n)); }

void SimConfig::validate() const {
  if (n < 1) throw DomainError("simulation n must be >= 1");
  if (!(f_n > 0.0 && f_n <= 1.0)) throw DomainError("simulation f_n must be in (0,1]");
  if (n1() < 1) throw DomainError("n * f_n must round to at least one validation row");
  if (reps < 1) throw DomainError("simulation reps must be >= 1");
  if (B < 0) throw DomainError("bootstrap size must be >= 0");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("level must be in (0,1)");
  if (threads < 1) throw DomainError("threads must be >= 1");
}

double sigma_of_eta(double eta) {
  if (!(eta > 0.0 && eta < kMaxEta)) throw DomainError("eta must lie in (0, 0.97)");
  const double z = normal_quantile(0.5 * (1.0 + eta));
  const double l9 = std::log(9.0);
  const double s2 = 0.25 * (l9 * l9 / (z * z) - 1.0);
  if (!(s2 > 0.0)) throw DomainError("sigma^2(eta) is not positive");
  return std::sqrt(s2);
}

Matrix generate_covariates(const SimModel& model, int rows, Stream& s) {
  Matrix x(rows, model.p());
  for (int i = 0; i < rows; ++i) {
    int j = 0;
    for (const auto& c : model.covariates) {
      double v = 0.0;
      switch (c.family) {
        case Family::Intercept: v = 1.0; break;
        case Family::Normal: v = c.a + c.b * s.normal(); break;
        case Family::LogNormal: v = std::exp(c.a + c.b * s.normal()); break;
        case Family::Bernoulli: v = s.bernoulli(c.a) ? 1.0 : 0.0; break;
        case Family::Uniform: v = c.a + (c.b - c.a) * s.uniform(); break;
        case Family::Poisson: v = poisson(s, c.a); break;
        case Family::ChiSquare2: v = -2.0 * std::log(s.uniform()); break;
        case Family::NormalMixture:
          v = s.bernoulli(0.6) ? -1.0 + s.normal() : 4.0 + std::sqrt(2.0) * s.normal();
          break;
        case Family::BivariateNormal: {
          const double z1 = s.normal();
          const double z2 = c.a * z1 + std::sqrt(1.0 - c.a * c.a) * s.normal();
          x(i, j) = z1 - c.shift;
          x(i, j + 1) = z2 - c.shift;
          j += 2;
          continue;
        }
      }
      x(i, j) = c.family == Family::Intercept ? 1.0 : v - c.shift;
      ++j;
    }
  }
  return x;
}

Dataset generate_dataset(const SimModel& model, const SimConfig& cfg, Stream& stream) {
  cfg.validate();
  return generate_dataset(model, cfg.n, cfg.n1(), stream);
}

Dataset generate_dataset(const SimModel& model, int n, int n1, Stream& stream) {
  if (model.beta0.size() != model.p()) throw DimensionError("beta0 length differs from covariates");
  if (n < 1 || n1 < 0 || n1 > n) throw DomainError("invalid sample sizes");
  const Matrix x = generate_covariates(model, n, stream);
  std::vector<std::uint8_t> y(static_cast<std::size_t>(n)), yt(static_cast<std::size_t>(n));
  const Vector u = x * model.beta0;
  for (int i = 0; i < n; ++i) {
    const bool yi = stream.uniform() < psi(u[i]);
    const double flip = yi ? model.theta0.theta2 : model.theta0.theta1;
    const bool flipped = stream.uniform() < flip;
    y[i] = yi ? 1 : 0;
    yt[i] = (yi != flipped) ? 1 : 0;
  }
  std::vector<std::uint8_t> yv(y.begin(), y.begin() + n1);
  std::vector<std::uint8_t> ytv(yt.begin(), yt.begin() + n1);
  std::vector<std::uint8_t> ytn(yt.begin() + n1, yt.end());
  return Dataset(x.topRows(n1), std::move(yv), std::move(ytv), x.bottomRows(n - n1),
                 std::move(ytn), model.has_intercept());
}

EstimateStats summarize_estimates(const std::vector<double>& values, double truth, int failures) {
  EstimateStats s;
  s.truth = truth;
  s.failures = failures;
  s.values = values;
  s.used = static_cast<int>(values.size());
  if (values.empty()) {
    s.mean = s.bias = s.variance = s.mse = std::nan("");
    return s;
  }
  const double m = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / m;
  s.bias = s.mean - truth;
  double var = 0.0;
  double mse = 0.0;
  for (double v : values) {
    var += (v - s.mean) * (v - s.mean);
    mse += (v - truth) * (v - truth);
  }
  s.variance = var / m;
  s.mse = mse / m;
  return s;
}

const MethodSummary& EtaSummary::method(Method m) const {
  for (const auto& ms : methods) {
    if (ms.method == m) return ms;
  }
  throw DomainError("method not present in summary");
}

BiasMseSummary run_bias_mse_study(const std::vector<double>& etas, const SimConfig& cfg,
                                  MisclassProbs theta0) {
  cfg.validate();
  static constexpr Method kMethods[] = {Method::Jmle, Method::Pmle, Method::Cmle, Method::Naive};
  constexpr std::size_t kM = std::size(kMethods);

  BiasMseSummary summary;
  summary.cfg = cfg;
  summary.theta0 = theta0;
  const SolverOptions opts;
  for (std::size_t e = 0; e < etas.size(); ++e) {
    SimModel model = eta_design(etas[e]);
    model.theta0 = theta0;
    const auto reps = static_cast<std::size_t>(cfg.reps);
    std::vector<Outcome> outcomes(reps * kM);
    parallel_for(reps, cfg.threads, [&](std::size_t r) {
      Stream s(cfg.seed, {kDataTag, static_cast<std::uint64_t>(e), r});
      const Dataset data = generate_dataset(model, cfg, s);
      for (std::size_t m = 0; m < kM; ++m) {
        outcomes[r * kM + m] = run_method(kMethods[m], data, opts, cfg.raw_aggregation);
      }
    });

    EtaSummary row;
    row.eta = etas[e];
    row.sigma = sigma_of_eta(etas[e]);
    for (std::size_t m = 0; m < kM; ++m) {
      std::vector<double> b1, t1;
      int failures = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const Outcome& o = outcomes[r * kM + m];
        if (o.failed) ++failures;
        if (!o.params) continue;
        b1.push_back((*o.params)[0]);
        if (kMethods[m] != Method::Naive) t1.push_back((*o.params)[o.params->size() - 1]);
      }
      MethodSummary ms;
      ms.method = kMethods[m];
      ms.beta1 = summarize_estimates(b1, model.beta0[0], failures);
      if (kMethods[m] != Method::Naive) {
        ms.theta1 = summarize_estimates(t1, theta0.theta1, failures);
      }
      row.methods.push_back(std::move(ms));
    }
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

CoverageStats summarize_coverage(const std::vector<Interval>& intervals, double truth) {
  CoverageStats s;
  s.used = static_cast<int>(intervals.size());
  if (intervals.empty()) {
    s.coverage = s.avg_length = std::nan("");
    return s;
  }
  int hits = 0;
  double len = 0.0;
  for (const auto& iv : intervals) {
    if (iv.contains(truth)) ++hits;
    len += iv.length();
  }
  s.coverage = static_cast<double>(hits) / s.used;
  s.avg_length = len / s.used;
  return s;
}

CoverageSummary run_coverage_study(const SimModel& model, const SimConfig& cfg) {
  cfg.validate();
  const int p = model.p();
  const auto reps = static_cast<std::size_t>(cfg.reps);
  const double eta = 0.5 * (1.0 - cfg.level);

  struct Rep {
    bool fit_ok = false;
    bool cov_ok = false;
    bool boot_ok = false;
    std::vector<Interval> asym;
    std::vector<Interval> boot;
  };
  std::vector<Rep> out(reps);
  const SolverOptions opts;
  parallel_for(reps, cfg.threads, [&](std::size_t r) {
    Stream s(cfg.seed, {kDataTag, r});
    const Dataset data = generate_dataset(model, cfg, s);
    Rep& rep = out[r];
    FitResult fit;
    try {
      fit = fit_pmle(data, opts);
      rep.fit_ok = true;
    } catch (const Error&) {
      return;
    }
    try {
      const CovarianceBundle b = estimate_bundle(data, fit.beta_hat, *fit.theta_est);
      rep.asym = wald_ci(b, fit.beta_hat, cfg.level);
      rep.cov_ok = true;
    } catch (const Error&) {
    }
    if (cfg.B > 0) {
      BootstrapConfig bc;
      bc.B = cfg.B;
      bc.seed = derive_seed(cfg.seed, {kBootstrapTag, r});
      bc.level = cfg.level;
      try {
        const BootstrapDraws d = run_bootstrap(data, fit.beta_hat, opts, bc);
        for (int j = 0; j < p; ++j) {
          rep.boot.push_back(percentile_ci_linear(d, Vector::Unit(p, j), eta));
        }
        rep.boot_ok = true;
      } catch (const Error&) {
      }
    }
  });

  CoverageSummary summary;
  summary.model = std::string(to_string(model.name));
  summary.cfg = cfg;
  for (const auto& rep : out) {
    if (!rep.fit_ok) ++summary.fit_failures;
    if (rep.fit_ok && !rep.cov_ok) ++summary.covariance_failures;
    if (rep.fit_ok && cfg.B > 0 && !rep.boot_ok) ++summary.bootstrap_failures;
  }
  for (int j = 0; j < p; ++j) {
    std::vector<Interval> a, b;
    for (const auto& rep : out) {
      if (rep.cov_ok) a.push_back(rep.asym[static_cast<std::size_t>(j)]);
      if (rep.boot_ok) b.push_back(rep.boot[static_cast<std::size_t>(j)]);
    }
    summary.asymptotic.push_back(summarize_coverage(a, model.beta0[j]));
    if (cfg.B > 0) summary.bootstrap.push_back(summarize_coverage(b, model.beta0[j]));
  }
  return summary;
}

}  // namespace misclassit
