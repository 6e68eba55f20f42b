// Command-line front end: fit, bootstrap and simulate.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "misclassit/asymptotic.hpp"
#include "misclassit/bootstrap.hpp"
#include "misclassit/errors.hpp"
#include "misclassit/estimators.hpp"
#include "misclassit/extensions.hpp"
#include "misclassit/io.hpp"
#include "misclassit/rng.hpp"
#include "misclassit/sim.hpp"

namespace mc = misclassit;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kReportVersion = 1;

enum ExitCode { kOk = 0, kSchema = 2, kSolver = 3, kIdentifiability = 4 };

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <typename M>
json mat(const M& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

json interval(const mc::Interval& iv) { return json::array({iv.lower, iv.upper}); }

json warnings_json(const std::vector<mc::Warning>& ws) {
  json a = json::array();
  for (auto w : ws) a.push_back(std::string(mc::to_string(w)));
  return a;
}

json header(const std::string& command) {
  json j;
  j["report_version"] = kReportVersion;
  j["software_version"] = kVersion;
  j["command"] = command;
  return j;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void emit(const json& report, const std::string& out_path) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw mc::SchemaError("cannot write output file '" + out_path + "'");
    f << text;
  }
}

int fail(int code, const std::string& type, const std::string& message) {
  json j;
  j["report_version"] = kReportVersion;
  j["error"] = {{"type", type}, {"message", message}, {"exit_code", code}};
  std::cout << j.dump(2) << "\n";
  std::cerr << "error: " << message << "\n";
  return code;
}

// Settings shared by every subcommand; a --config JSON file supplies
// defaults that explicit flags override.
struct Common {
  std::string data;
  std::string config;
  std::string out;
  bool intercept = false;
  bool no_timing = false;
  std::optional<int> threads;
  mc::SolverOptions solver;
  double level = 0.95;
};

void add_common(CLI::App* app, Common& c, bool needs_data) {
  auto* d = app->add_option("--data", c.data, "CSV dataset");
  if (needs_data) d->required();
  app->add_option("--config", c.config, "JSON file with solver and run settings");
  app->add_option("--out", c.out, "Write the report here instead of stdout");
  app->add_flag("--intercept", c.intercept, "Prepend an intercept column");
  app->add_flag("--no-timing", c.no_timing, "Omit wall-clock timing from the report");
  app->add_option("--threads", c.threads, "Worker threads (default: MISCLASSIT_THREADS or 1)");
  app->add_option("--tol", c.solver.tol, "Solver tolerance on the score max-norm");
  app->add_option("--max-iter", c.solver.max_iter, "Solver iteration limit");
  app->add_option("--damping", c.solver.damping, "Line-search contraction factor");
  app->add_option("--max-step", c.solver.max_step, "Cap on the Newton step length");
  app->add_option("--level", c.level, "Confidence level");
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream f(path);
  if (!f) throw mc::SchemaError("cannot open config file '" + path + "'");
  try {
    json j = json::parse(f);
    if (!j.is_object()) throw mc::SchemaError("config file must hold a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw mc::SchemaError(std::string("config file: ") + e.what());
  }
}

template <typename T>
void from_config(const json& cfg, const char* key, const CLI::App* app, const char* flag,
                 T& target) {
  if (!cfg.contains(key)) return;
  if (const auto* opt = app->get_option_no_throw(flag); opt != nullptr && opt->count() > 0) return;
  try {
    target = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw mc::SchemaError(std::string("config key '") + key + "' has the wrong type");
  }
}

void apply_config(Common& c, const CLI::App* app, const json& cfg) {
  from_config(cfg, "tol", app, "--tol", c.solver.tol);
  from_config(cfg, "max_iter", app, "--max-iter", c.solver.max_iter);
  from_config(cfg, "damping", app, "--damping", c.solver.damping);
  from_config(cfg, "max_step", app, "--max-step", c.solver.max_step);
  from_config(cfg, "level", app, "--level", c.level);
  from_config(cfg, "intercept", app, "--intercept", c.intercept);
  if (cfg.contains("threads") && !c.threads) {
    int t = 1;
    from_config(cfg, "threads", app, "--threads", t);
    c.threads = t;
  }
  c.solver.validate();
  if (!(c.level > 0.0 && c.level < 1.0)) throw mc::SchemaError("level must be in (0,1)");
}

json fit_json(const mc::FitResult& fit) {
  json j;
  j["beta"] = vec(fit.beta_hat);
  if (fit.theta_hat) {
    j["theta"] = {{"theta1", fit.theta_hat->theta1}, {"theta2", fit.theta_hat->theta2}};
  } else {
    j["theta"] = nullptr;
  }
  return j;
}

json diagnostics_json(const mc::FitResult& fit) {
  return {{"converged", fit.converged},
          {"iterations", fit.iterations},
          {"final_score_norm", fit.final_score_norm}};
}

json covariance_json(const mc::CovarianceBundle& b) {
  json j;
  j["beta_cov"] = mat(b.beta_cov);
  j["Sigma0"] = mat(b.Sigma0);
  j["Zdot"] = mat(b.Zdot);
  j["theta_block"] = mat(b.theta_block);
  j["f_used"] = b.f_used;
  return j;
}

json ci_json(const std::string& ci, const mc::CovarianceBundle* b, const Eigen::VectorXd& beta,
             double level) {
  if (ci != "wald" || b == nullptr) return nullptr;
  json rows = json::array();
  for (const auto& iv : mc::wald_ci(*b, beta, level)) rows.push_back(interval(iv));
  return {{"type", "wald"}, {"level", level}, {"intervals", rows}};
}

int run_fit(const CLI::App* app, Common& c, const std::string& method, bool theta2_zero,
            bool grouped, const std::string& ci) {
  Timer timer;
  apply_config(c, app, load_config(c.config));
  const mc::CsvTable table = mc::read_csv_file(c.data);

  json r = header("fit");
  r["method"] = method;
  std::optional<mc::FitResult> fit;
  std::optional<mc::CovarianceBundle> bundle;
  json extra = json::object();

  if (grouped) {
    if (method != "pmle") throw mc::SchemaError("--grouped is only available with --method pmle");
    const mc::GroupedDataset gd = mc::to_grouped(table, c.intercept);
    const mc::GroupedFit gf = mc::fit_pmle_grouped(gd, c.solver);
    fit = gf.fit;
    bundle = mc::grouped_covariance(gd, gf.fit.beta_hat, gf.theta_ests).total;
    json groups = json::array();
    for (int k = 0; k < gd.K(); ++k) {
      const auto& e = gf.theta_ests[static_cast<std::size_t>(k)];
      groups.push_back({{"n", gd.group(k).n()},
                        {"n1", gd.group(k).n1()},
                        {"theta1", e.theta.theta1},
                        {"theta2", e.theta.theta2}});
    }
    extra["groups"] = groups;
    r["n"] = gd.n();
    r["p"] = gd.p();
  } else {
    const mc::Dataset data = mc::to_dataset(table, c.intercept);
    r["n"] = data.n();
    r["n1"] = data.n1();
    r["p"] = data.p();
    if (method == "pmle") {
      if (data.n1() < 1) throw mc::SchemaError("pmle needs validation rows (y present)");
      if (theta2_zero) {
        fit = mc::fit_pmle_theta2_zero(data, c.solver);
        bundle = mc::theta2_zero_covariance(data, *fit);
      } else {
        fit = mc::fit_pmle(data, c.solver);
        bundle = mc::estimate_bundle(data, fit->beta_hat, *fit->theta_est);
      }
    } else if (method == "jmle") {
      fit = mc::fit_jmle(data, c.solver);
    } else if (method == "cmle") {
      fit = mc::fit_cmle(data, c.solver);
    } else {
      fit = mc::fit_naive(data, c.solver);
    }
  }

  r["estimates"] = fit_json(*fit);
  r["covariance"] = bundle ? covariance_json(*bundle) : json(nullptr);
  r["ci"] = ci_json(ci, bundle ? &*bundle : nullptr, fit->beta_hat, c.level);
  for (auto& [k, v] : extra.items()) r[k] = v;
  r["diagnostics"] = diagnostics_json(*fit);
  r["warnings"] = warnings_json(fit->warnings);
  if (!c.no_timing) r["timing"] = {{"seconds", timer.seconds()}};
  emit(r, c.out);
  return kOk;
}

int run_bootstrap_cmd(const CLI::App* app, Common& c, int B, std::uint64_t seed, double eta,
                      const std::string& c_list, const std::string& x0_list) {
  Timer timer;
  const json cfg = load_config(c.config);
  apply_config(c, app, cfg);
  from_config(cfg, "B", app, "--B", B);
  from_config(cfg, "seed", app, "--seed", seed);
  from_config(cfg, "eta", app, "--eta", eta);
  if (!(eta > 0.0 && eta < 0.5)) throw mc::SchemaError("--eta must be in (0, 0.5)");
  if (B < 1) throw mc::SchemaError("--B must be >= 1");

  const mc::Dataset data = mc::to_dataset(mc::read_csv_file(c.data), c.intercept);
  if (data.n1() < 1) throw mc::SchemaError("bootstrap needs validation rows (y present)");
  const mc::FitResult fit = mc::fit_pmle(data, c.solver);

  mc::BootstrapConfig bc;
  bc.B = B;
  bc.seed = seed;
  bc.level = 1.0 - 2.0 * eta;
  bc.threads = mc::resolve_threads(c.threads);
  const mc::BootstrapDraws draws = mc::run_bootstrap(data, fit.beta_hat, c.solver, bc);

  json r = header("bootstrap");
  r["n"] = data.n();
  r["n1"] = data.n1();
  r["p"] = data.p();
  r["B"] = B;
  r["seed"] = seed;
  r["eta"] = eta;
  r["estimates"] = fit_json(fit);
  r["replicates"] = {{"ok", draws.count(mc::ReplicateStatus::Ok)},
                     {"nonconverged", draws.count(mc::ReplicateStatus::Nonconverged)},
                     {"degenerate", draws.count(mc::ReplicateStatus::Degenerate)}};
  json coords = json::array();
  for (int j = 0; j < data.p(); ++j) {
    coords.push_back(interval(mc::percentile_ci_linear(draws, Eigen::VectorXd::Unit(data.p(), j), eta)));
  }
  r["ci"] = {{"type", "percentile"}, {"level", 1.0 - 2.0 * eta}, {"intervals", coords}};
  if (!c_list.empty()) {
    const auto cv = mc::parse_list(c_list);
    const Eigen::VectorXd cc = Eigen::Map<const Eigen::VectorXd>(cv.data(), static_cast<Eigen::Index>(cv.size()));
    if (cc.size() != data.p()) throw mc::SchemaError("--c must have p entries");
    r["linear"] = {{"c", vec(cc)}, {"interval", interval(mc::percentile_ci_linear(draws, cc, eta))}};
  }
  if (!x0_list.empty()) {
    const auto xv = mc::parse_list(x0_list);
    const Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(xv.data(), static_cast<Eigen::Index>(xv.size()));
    if (x0.size() != data.p()) throw mc::SchemaError("--risk-x0 must have p entries");
    r["risk"] = {{"x0", vec(x0)}, {"interval", interval(mc::percentile_ci_risk(draws, x0, eta))}};
  }
  r["diagnostics"] = diagnostics_json(fit);
  r["warnings"] = warnings_json(fit.warnings);
  if (!c.no_timing) r["timing"] = {{"seconds", timer.seconds()}};
  emit(r, c.out);
  return kOk;
}

std::string csv_num(double v) { return std::isfinite(v) ? mc::format_double(v) : "NA"; }

int run_simulate(const CLI::App* app, Common& c, const std::string& design, int reps,
                 std::uint64_t seed, int B, const std::string& etas_list) {
  Timer timer;
  apply_config(c, app, load_config(c.config));
  const int threads = mc::resolve_threads(c.threads);
  const std::string out_csv = c.out.empty() ? design + ".csv" : c.out;

  std::ostringstream csv;
  json side = header("simulate");
  side["design"] = design;
  side["reps"] = reps;
  side["seed"] = seed;
  side["csv"] = out_csv;

  if (design == "table5") {
    const std::vector<double> etas = mc::parse_list(etas_list);
    mc::SimConfig cfg;
    cfg.n = 300;
    cfg.f_n = 0.2;
    cfg.reps = reps;
    cfg.seed = seed;
    cfg.threads = threads;
    const auto s = mc::run_bias_mse_study(etas, cfg);
    side["config"] = {{"n", cfg.n}, {"n1", cfg.n1()}, {"etas", etas},
                      {"beta0", json::array({1.0, 2.0})}, {"theta0", json::array({0.1, 0.3})}};
    csv << "eta,sigma,method,parameter,bias,mse,used,failures\n";
    int rows = 0;
    for (const auto& row : s.rows) {
      for (const auto& m : row.methods) {
        const std::string prefix = mc::format_double(row.eta) + "," +
                                   mc::format_double(row.sigma) + "," +
                                   std::string(mc::to_string(m.method)) + ",";
        csv << prefix << "beta1," << csv_num(m.beta1.bias) << ',' << csv_num(m.beta1.mse) << ','
            << m.beta1.used << ',' << m.beta1.failures << '\n';
        if (m.theta1) {
          csv << prefix << "theta1," << csv_num(m.theta1->bias) << ','
              << csv_num(m.theta1->mse) << ',' << m.theta1->used << ',' << m.theta1->failures
              << '\n';
        } else {
          csv << prefix << "theta1,NA,NA,0,0\n";
        }
        rows += 2;
      }
    }
    side["rows"] = rows;
  } else {
    struct Cell {
      mc::SimModel model;
      int n;
      double f;
    };
    std::vector<Cell> cells;
    const std::vector<double> fs = {0.1, 0.2, 0.3};
    if (design == "table4") {
      for (double f : fs) cells.push_back({mc::model_p9(), 1000, f});
    } else {
      const int n = design == "table1" ? 300 : design == "table2" ? 600 : 1000;
      for (auto make : {mc::model_a, mc::model_b, mc::model_c}) {
        for (double f : fs) cells.push_back({make(), n, f});
      }
    }
    csv << "model,n,n1,ci_type,parameter,coverage,avg_length,used\n";
    int rows = 0;
    json runs = json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      mc::SimConfig cfg;
      cfg.n = cells[i].n;
      cfg.f_n = cells[i].f;
      cfg.reps = reps;
      cfg.seed = mc::derive_seed(seed, {i});
      cfg.B = B;
      cfg.level = c.level;
      cfg.threads = threads;
      const auto s = mc::run_coverage_study(cells[i].model, cfg);
      runs.push_back({{"model", s.model}, {"n", cfg.n}, {"n1", cfg.n1()},
                      {"fit_failures", s.fit_failures},
                      {"covariance_failures", s.covariance_failures},
                      {"bootstrap_failures", s.bootstrap_failures}});
      auto put = [&](const char* type, const std::vector<mc::CoverageStats>& v) {
        for (std::size_t j = 0; j < v.size(); ++j) {
          csv << s.model << ',' << cfg.n << ',' << cfg.n1() << ',' << type << ",beta"
              << (j + 1) << ',' << csv_num(v[j].coverage) << ',' << csv_num(v[j].avg_length)
              << ',' << v[j].used << '\n';
          ++rows;
        }
      };
      put("asymptotic", s.asymptotic);
      put("bootstrap", s.bootstrap);
    }
    side["B"] = B;
    side["level"] = c.level;
    side["runs"] = runs;
    side["rows"] = rows;
  }

  {
    std::ofstream f(out_csv, std::ios::binary);
    if (!f) throw mc::SchemaError("cannot write '" + out_csv + "'");
    f << csv.str();
  }
  if (!c.no_timing) side["timing"] = {{"seconds", timer.seconds()}};
  const std::string text = side.dump(2) + "\n";
  std::ofstream(out_csv + ".json", std::ios::binary) << text;
  std::cout << text;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logistic regression with misclassified binary responses"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;

  auto* fit = app.add_subcommand("fit", "Fit one estimator and report it as JSON");
  add_common(fit, common, true);
  std::string method = "pmle";
  bool theta2_zero = false;
  bool grouped = false;
  std::string ci = "wald";
  fit->add_option("--method", method, "Estimator")
      ->check(CLI::IsMember({"pmle", "jmle", "cmle", "naive"}));
  fit->add_flag("--theta2-zero", theta2_zero, "Assume no false negatives (theta2 = 0)");
  fit->add_flag("--grouped", grouped, "Group-specific misclassification (needs a group column)");
  fit->add_option("--ci", ci, "Interval type")->check(CLI::IsMember({"wald", "none"}));

  auto* boot = app.add_subcommand("bootstrap", "Two-sample bootstrap percentile intervals");
  add_common(boot, common, true);
  int B = 700;
  std::uint64_t seed = 0;
  double eta = 0.025;
  std::string c_list;
  std::string x0_list;
  boot->add_option("--B", B, "Bootstrap replicates");
  boot->add_option("--seed", seed, "Random seed");
  boot->add_option("--eta", eta, "Tail probability; the interval has level 1 - 2 eta");
  boot->add_option("--c", c_list, "Linear functional, comma separated");
  boot->add_option("--risk-x0", x0_list, "Covariate profile for the risk interval");

  auto* sim = app.add_subcommand("simulate", "Run a simulation design and write a CSV table");
  add_common(sim, common, false);
  std::string design;
  int reps = 250;
  std::uint64_t sim_seed = 1;
  int sim_B = 700;
  std::string etas = "0.6,0.7,0.8,0.9";
  sim->add_option("--design", design, "table1 .. table5")->required();
  sim->add_option("--reps", reps, "Simulated datasets per cell");
  sim->add_option("--seed", sim_seed, "Random seed");
  sim->add_option("--B", sim_B, "Bootstrap replicates per dataset (0 disables)");
  sim->add_option("--etas", etas, "Eta grid for table5");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kSchema, "usage", e.what());
  }

  try {
    if (fit->parsed()) return run_fit(fit, common, method, theta2_zero, grouped, ci);
    if (boot->parsed()) return run_bootstrap_cmd(boot, common, B, seed, eta, c_list, x0_list);
    static const std::vector<std::string> designs = {"table1", "table2", "table3", "table4",
                                                     "table5"};
    if (std::find(designs.begin(), designs.end(), design) == designs.end()) {
      return fail(kSchema, "schema", "unknown design '" + design + "'");
    }
    if (reps < 1) return fail(kSchema, "schema", "--reps must be >= 1");
    return run_simulate(sim, common, design, reps, sim_seed, sim_B, etas);
  } catch (const mc::IdentifiabilityError& e) {
    return fail(kIdentifiability, "identifiability", e.what());
  } catch (const mc::DegenerateError& e) {
    return fail(kIdentifiability, "degenerate", e.what());
  } catch (const mc::SolverError& e) {
    return fail(kSolver, "solver", e.what());
  } catch (const mc::InsufficientSuccesses& e) {
    return fail(kSolver, "insufficient_successes", e.what());
  } catch (const mc::SingularZdot& e) {
    return fail(kSolver, "singular_zdot", e.what());
  } catch (const mc::Error& e) {
    return fail(kSchema, "schema", e.what());
  }
}
