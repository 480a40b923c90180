// Command-line front end: tuple validation, estimator statistics, exact
// enumeration, single descent runs and full experiments.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "esg/descent.hpp"
#include "esg/estimators.hpp"
#include "esg/exact.hpp"
#include "esg/harness.hpp"
#include "esg/oracles.hpp"
#include "esg/tuples.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailed = 1;
constexpr int kUsage = 2;
constexpr int kRuntime = 3;

constexpr std::size_t kExactDisplayLimit = 12;

std::vector<double> parse_point(const std::string& csv) {
  std::vector<double> x;
  std::size_t start = 0;
  for (;;) {
    const auto comma = csv.find(',', start);
    x.push_back(esg::detail::parse_real(csv.substr(start, comma - start), "--x component"));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return x;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += esg::detail::format_real(v[i]);
  }
  return out;
}

int cmd_validate_tuple(const std::string& name) {
  const esg::GoodTuple t = esg::make_tuple(name);
  const double tol = t.name == "bigauss_cosine" ? 1e-5 : 1e-6;
  const auto grid = esg::probability_grid(99);
  const auto report = esg::validate_tuple(t, grid);
  std::printf("tuple: %s\n", t.name.c_str());
  std::printf("noise: %s\n", t.sigma.name().c_str());
  std::printf("encoding: %s\n", t.sigma_hat->name().c_str());
  std::printf("calibration max residual: %.3e (tolerance %.0e)\n", report.max_residual, tol);
  bool ok = report.max_residual <= tol;
  if (t.sigma.is_atomic()) {
    std::printf("convolution max deviation: n/a (atomic noise)\n");
  } else {
    const auto [lo, hi] = t.sigma_hat->support();
    std::vector<double> z(99);
    const double a = std::isfinite(lo) ? lo : -(esg::numerics::kPi + 8.0);
    const double b = std::isfinite(hi) ? hi : esg::numerics::kPi + 8.0;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = a + (b - a) * static_cast<double>(i + 1) / 100.0;
    const double dev = esg::convolution_check(t, z);
    std::printf("convolution max deviation: %.3e (tolerance %.0e)\n", dev, tol);
    ok = ok && dev <= tol;
  }
  std::printf("%s\n", ok ? "PASS" : "FAIL");
  return ok ? kOk : kValidationFailed;
}

int cmd_estimate(const std::string& estimator, const std::string& problem, const std::string& x_csv,
                 std::uint64_t samples, std::uint64_t seed) {
  const auto spec = esg::parse_estimator(estimator);
  const auto prob = esg::parse_problem(problem);
  esg::Stream oracle_rng(seed, 0);
  const esg::Oracle oracle = prob.instantiate(oracle_rng);
  auto x = parse_point(x_csv);
  if (x.size() == 1 && oracle.dimension() > 1) x.assign(oracle.dimension(), x[0]);
  esg::Stream rng(seed, esg::kDescentNoiseStream);
  const auto s = esg::estimate_mean_and_variance(spec, x, oracle, samples, rng);

  std::printf("estimator: %s\n", s.estimator.c_str());
  std::printf("problem: %s (d=%zu)\n", prob.text.c_str(), oracle.dimension());
  std::printf("samples: %llu\n", static_cast<unsigned long long>(s.n_samples));
  std::printf("gradient_space: %s\n", spec.encoded() ? "e" : "x");
  std::printf("mean_gradient: %s\n", join(s.mean_gradient).c_str());
  std::printf("variance: %s\n", join(s.variance).c_str());
  std::printf("std_err: %s\n", join(s.std_err).c_str());
  if (s.mean_value)
    std::printf("mean_value: %s\nvalue_std_err: %s\n", esg::detail::format_real(*s.mean_value).c_str(),
                esg::detail::format_real(*s.value_std_err).c_str());
  if (oracle.dimension() <= kExactDisplayLimit) {
    auto g = esg::multilinear_gradient(x, oracle);
    if (spec.encoded())
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] *= spec.tuple->sigma_hat->density(spec.tuple->sigma_hat->inv_cdf(x[i]));
    std::printf("exact_gradient: %s\n", join(g).c_str());
    std::printf("exact_value: %s\n", esg::detail::format_real(esg::multilinear_value(x, oracle)).c_str());
  }
  std::printf("queries: %llu\n", static_cast<unsigned long long>(s.total_queries));
  return kOk;
}

int cmd_exact(const std::string& problem, const std::string& x_csv, std::uint64_t seed) {
  const auto prob = esg::parse_problem(problem);
  esg::Stream oracle_rng(seed, 0);
  const esg::Oracle oracle = prob.instantiate(oracle_rng);
  auto x = parse_point(x_csv);
  if (x.size() == 1 && oracle.dimension() > 1) x.assign(oracle.dimension(), x[0]);
  std::printf("value: %s\n", esg::detail::format_real(esg::multilinear_value(x, oracle)).c_str());
  std::printf("gradient: %s\n", join(esg::multilinear_gradient(x, oracle)).c_str());
  return kOk;
}

int cmd_descend(const std::string& path, const std::string& out_override) {
  auto run = esg::load_run_spec(path);
  if (!out_override.empty()) run.output = out_override;
  esg::Stream oracle_rng(run.config.seed, 0);
  const esg::Oracle oracle = run.problem.instantiate(oracle_rng);
  const auto traj = esg::descend(run.config, oracle);
  if (!run.output.empty()) esg::detail::write_file(run.output, esg::format_trajectory_csv(traj));
  std::printf("estimator: %s\n", run.config.estimator.label.c_str());
  std::printf("steps: %llu\n", static_cast<unsigned long long>(run.config.steps));
  std::printf("oracle_calls: %llu\n", static_cast<unsigned long long>(traj.events.back().oracle_calls));
  std::printf("best_so_far: %s\n", esg::detail::format_real(traj.best()).c_str());
  std::printf("final_x: %s\n", join(traj.final_x).c_str());
  if (!run.output.empty()) std::printf("trajectory: %s\n", run.output.c_str());
  return kOk;
}

int cmd_experiment(const std::string& path, const std::string& out_override, long trials_override) {
  auto spec = esg::load_experiment_spec(path);
  if (!out_override.empty()) spec.output_dir = out_override;
  if (trials_override > 0) spec.n_trials = static_cast<std::size_t>(trials_override);
  const auto result = esg::run_experiment(spec);
  std::printf("problem: %s, trials: %zu, budget: %llu\n", spec.problem.text.c_str(), spec.n_trials,
              static_cast<unsigned long long>(spec.budget));
  for (const auto& m : result.series.methods) {
    const auto& last = m.points.back();
    std::printf("%-24s median %g  [p25 %g, p75 %g] at %llu calls\n", m.method.c_str(), last.median, last.p25,
                last.p75, static_cast<unsigned long long>(last.oracle_calls));
  }
  std::printf("csv: %s\nplot: %s\n", result.csv_path.string().c_str(), result.plot_path.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-query stochastic gradients for pseudo-Boolean objectives"};
  app.require_subcommand(1);

  std::string tuple_name;
  auto* validate = app.add_subcommand("validate-tuple", "Check the calibration identity of a good tuple");
  validate->add_option("name", tuple_name, "spike | arch | cosine | bigauss_cosine | longjump")->required();

  std::string estimator, problem, x_csv;
  std::uint64_t samples = 100000, seed = 0;
  auto* estimate = app.add_subcommand("estimate", "Monte Carlo mean and variance of an estimator");
  estimate->add_option("estimator", estimator, "esg:<tuple> | encoded_esg:<tuple> | naive | reinforce | arm | disarm")
      ->required();
  estimate->add_option("problem", problem, "slice:<d> | knapsack:<d> | table:<path>")->required();
  estimate->add_option("--x", x_csv, "comma-separated probabilities (one value broadcasts)")->required();
  estimate->add_option("--samples", samples, "number of samples")->check(CLI::Range(2ULL, 1ULL << 40));
  estimate->add_option("--seed", seed, "random seed");

  std::string exact_problem, exact_x;
  std::uint64_t exact_seed = 0;
  auto* exact = app.add_subcommand("exact", "Exact multilinear value and gradient by enumeration");
  exact->add_option("problem", exact_problem, "slice:<d> | knapsack:<d> | table:<path>")->required();
  exact->add_option("--x", exact_x, "comma-separated probabilities (one value broadcasts)")->required();
  exact->add_option("--seed", exact_seed, "seed for random problem instances");

  std::string run_path, run_out;
  auto* descend = app.add_subcommand("descend", "Run one descent from a JSON config");
  descend->add_option("config", run_path, "run config file")->required();
  descend->add_option("--out", run_out, "trajectory CSV path (overrides the config)");

  std::string spec_path, spec_out;
  long trials = 0;
  auto* experiment = app.add_subcommand("experiment", "Run a multi-trial experiment from a JSON spec");
  experiment->add_option("spec", spec_path, "experiment spec file")->required();
  experiment->add_option("--out", spec_out, "output directory (overrides the spec)");
  experiment->add_option("--trials", trials, "number of trials (overrides the spec)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate_tuple(tuple_name);
    if (*estimate) return cmd_estimate(estimator, problem, x_csv, samples, seed);
    if (*exact) return cmd_exact(exact_problem, exact_x, exact_seed);
    if (*descend) return cmd_descend(run_path, run_out);
    if (*experiment) return cmd_experiment(spec_path, spec_out, trials);
  } catch (const esg::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
