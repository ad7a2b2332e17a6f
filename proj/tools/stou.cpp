// stou: simulate STOU fields, fit them, and run interval coverage experiments.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "stou/ci_bootstrap.hpp"
#include "stou/errors.hpp"
#include "stou/estimate_cl.hpp"
#include "stou/estimate_mm.hpp"
#include "stou/experiment.hpp"
#include "stou/field_io.hpp"
#include "stou/parallel.hpp"
#include "stou/sim_cholesky.hpp"
#include "stou/sim_grid.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

using stou::CiMethod;
using stou::ExperimentConfig;

struct Options {
  ExperimentConfig cfg;
  std::string method = "mc-exact";
  std::string sim_method = "exact";
  std::string field;
  std::string out;
};

void add_truth(CLI::App* app, Options& o) {
  app->add_option("--lambda", o.cfg.lambda, "decay rate lambda")->capture_default_str();
  app->add_option("--c", o.cfg.c, "ambit cone speed c")->capture_default_str();
  app->add_option("--tau", o.cfg.tau, "Levy seed standard deviation tau")->capture_default_str();
  app->add_option("--mu-seed", o.cfg.mu_seed, "Levy seed mean")->capture_default_str();
}

void add_lattice(CLI::App* app, Options& o, bool with_size) {
  if (with_size) {
    app->add_option("--nx", o.cfg.nx, "spatial points")->capture_default_str();
    app->add_option("--nt", o.cfg.nt, "temporal points")->capture_default_str();
  }
  app->add_option("--dx", o.cfg.dx, "spatial spacing")->capture_default_str();
  app->add_option("--dt", o.cfg.dt, "temporal spacing")->capture_default_str();
}

void add_cl(CLI::App* app, Options& o) {
  app->add_option("--scenario", o.cfg.scenario, "free CL parameters, e.g. lambda,c_tilde")->capture_default_str();
  app->add_option("--cutoff", o.cfg.cutoff_d, "pair cutoff in grid steps")->capture_default_str();
  app->add_option("--window-nx", o.cfg.window_nx, "window extent in x")->capture_default_str();
  app->add_option("--window-nt", o.cfg.window_nt, "window extent in t")->capture_default_str();
  app->add_option("--step-x", o.cfg.step_x, "window stride in x")->capture_default_str();
  app->add_option("--step-t", o.cfg.step_t, "window stride in t")->capture_default_str();
}

void add_mc(CLI::App* app, Options& o) {
  app->add_option("--B", o.cfg.replications, "bootstrap replications")->capture_default_str();
  app->add_option("--max-lag", o.cfg.max_lag, "moments-matching ACF lags")->capture_default_str();
  app->add_option("--truncation-p", o.cfg.truncation_p, "grid kernel truncation steps")->capture_default_str();
  app->add_option("--cells-per-obs", o.cfg.cells_per_obs_cell, "grid mesh subdivision")->capture_default_str();
}

void add_run(CLI::App* app, Options& o) {
  app->add_option("--seed", o.cfg.seed, "master seed")->capture_default_str();
  app->add_option("--workers", o.cfg.workers, "worker threads (default from STOU_WORKERS)")->capture_default_str();
  app->add_option("--max-points", o.cfg.max_points, "dense simulation budget in lattice points")->capture_default_str();
}

// Reads a flat key = value file and files every key under the subcommand
// being run, so the same file works without section headers.
class FlatConfig : public CLI::ConfigINI {
 public:
  std::string subcommand;

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::vector<CLI::ConfigItem> items = CLI::ConfigINI::from_config(input);
    for (auto& item : items) {
      if (item.parents.empty() && !subcommand.empty()) item.parents.push_back(subcommand);
    }
    return items;
  }
};

CiMethod resolve_method(const std::string& name) {
  if (auto m = stou::parse_method(name)) return *m;
  throw stou::Error(stou::ErrorKind::ConfigInvalid, "method: unknown method '" + name + "'");
}

std::ostream& output_stream(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw stou::Error(stou::ErrorKind::Io, "cannot open '" + path + "' for writing");
  return file;
}

void write_intervals(std::ostream& out, const std::vector<stou::IntervalEstimate>& intervals) {
  out << "parameter,estimate,lower,upper,median,level\n";
  for (const auto& iv : intervals) {
    out << fmt::format("{},{},{},{},{},{}\n", stou::parameter_name(iv.parameter), iv.point, iv.lower, iv.upper,
                       iv.median, iv.level);
  }
}

stou::BootstrapOptions bootstrap_options(const Options& o, CiMethod method) {
  stou::BootstrapOptions b;
  b.replications = o.cfg.replications;
  b.level = o.cfg.level;
  b.simulator = method == CiMethod::McGrid ? stou::SimulatorKind::Grid : stou::SimulatorKind::Exact;
  b.grid = stou::GridSimConfig{o.cfg.truncation_p, o.cfg.cells_per_obs_cell};
  b.max_lag = o.cfg.max_lag;
  b.max_points = o.cfg.max_points;
  b.workers = o.cfg.workers;
  return b;
}

int cmd_simulate(const Options& o) {
  const stou::StouParams truth = o.cfg.truth();
  const stou::Lattice lattice = o.cfg.lattice();
  stou::Rng rng = stou::make_stream(stou::derive_seed(o.cfg.seed, 0, 0));
  std::unique_ptr<stou::FieldSimulator> sim;
  if (o.sim_method == "exact") {
    sim = std::make_unique<stou::ExactSimulator>(truth, lattice, o.cfg.max_points);
  } else if (o.sim_method == "grid") {
    sim = std::make_unique<stou::GridSimulator>(truth, lattice,
                                                stou::GridSimConfig{o.cfg.truncation_p, o.cfg.cells_per_obs_cell});
  } else {
    throw stou::Error(stou::ErrorKind::ConfigInvalid, "method: simulate accepts exact or grid");
  }
  const stou::FieldSample field = sim->simulate(rng);
  std::ofstream file;
  stou::write_field_csv(output_stream(o.out, file), field);
  return 0;
}

int cmd_fit_mm(const Options& o) {
  const stou::FieldSample field = stou::read_field_csv(o.field, o.cfg.dx, o.cfg.dt);
  const stou::StouParams fit = stou::fit_mm(field, o.cfg.max_lag);
  std::ofstream file;
  std::ostream& out = output_stream(o.out, file);
  out << "parameter,estimate\n";
  for (stou::Parameter p : stou::kAllParameters) {
    out << fmt::format("{},{}\n", stou::parameter_name(p), stou::parameter_value(fit, p));
  }
  return 0;
}

stou::EstimationScenario scenario_from_mm(const Options& o, const stou::FieldSample& field) {
  // Coordinates that are not estimated are pinned at the moments-matching fit.
  return stou::EstimationScenario::parse(o.cfg.scenario, stou::ThetaCL::from_params(stou::fit_mm(field, o.cfg.max_lag)));
}

int cmd_fit_cl(const Options& o) {
  const stou::FieldSample field = stou::read_field_csv(o.field, o.cfg.dx, o.cfg.dt);
  const stou::EstimationScenario scenario = scenario_from_mm(o, field);
  const stou::ClCiResult res =
      stou::sandwich_ci(field, stou::PairWeightSpec{o.cfg.cutoff_d, true},
                        stou::WindowSpec{o.cfg.window_nx, o.cfg.window_nt, o.cfg.step_x, o.cfg.step_t}, scenario,
                        o.cfg.level);
  if (!res.fit.converged) std::cerr << "warning: optimizer did not converge within its iteration budget\n";
  std::ofstream file;
  std::ostream& out = output_stream(o.out, file);
  out << "parameter,estimate,se\n";
  for (std::size_t i = 0; i < res.fit.free_indices.size(); ++i) {
    const int k = res.fit.free_indices[i];
    out << fmt::format("{},{},{}\n", stou::theta_name(k), res.fit.theta_hat.vector()[k], res.fit.standard_errors[i]);
  }
  return 0;
}

int cmd_ci(const Options& o) {
  const CiMethod method = resolve_method(o.method);
  const stou::FieldSample field = stou::read_field_csv(o.field, o.cfg.dx, o.cfg.dt);
  std::vector<stou::IntervalEstimate> intervals;
  if (method == CiMethod::ClSandwich) {
    intervals = stou::sandwich_ci(field, stou::PairWeightSpec{o.cfg.cutoff_d, true},
                                  stou::WindowSpec{o.cfg.window_nx, o.cfg.window_nt, o.cfg.step_x, o.cfg.step_t},
                                  scenario_from_mm(o, field), o.cfg.level)
                    .intervals;
  } else {
    const stou::BootstrapResult res = stou::mc_ci(field, bootstrap_options(o, method), o.cfg.seed);
    if (res.dropped > 0) std::cerr << fmt::format("note: {} bootstrap refits dropped\n", res.dropped);
    intervals = res.intervals;
  }
  std::ofstream file;
  write_intervals(output_stream(o.out, file), intervals);
  return 0;
}

int cmd_experiment(Options o, stou::TableKind kind, std::string_view command) {
  o.cfg.method = resolve_method(o.method);
  if (!o.out.empty()) o.cfg.output = o.out;
  const stou::CoverageReport report = stou::run_experiment(o.cfg, kind, command);
  std::cout << (kind == stou::TableKind::Coverage ? "parameter,coverage,se,n\n" : "parameter,proxy,se,n\n");
  for (const auto& row : report.rows) {
    const double value = kind == stou::TableKind::Coverage ? row.rate : row.mean_proxy;
    const double se = kind == stou::TableKind::Coverage ? row.se : row.proxy_se;
    const int n = kind == stou::TableKind::Coverage ? row.datasets : row.proxy_count;
    std::cout << fmt::format("{},{:.1f},{:.1f},{}\n", stou::parameter_name(row.parameter), 100 * value, 100 * se, n);
  }
  if (report.failed_datasets > 0) std::cerr << fmt::format("note: {} data sets failed\n", report.failed_datasets);
  return 0;
}

// Coverage proxies for a single observed field.
int cmd_proxy_field(const Options& o) {
  const CiMethod method = resolve_method(o.method);
  if (method == CiMethod::ClSandwich) {
    throw stou::Error(stou::ErrorKind::ConfigInvalid, "method: coverage proxies need a Monte Carlo method");
  }
  const stou::FieldSample field = stou::read_field_csv(o.field, o.cfg.dx, o.cfg.dt);
  const stou::BootstrapResult res = stou::mc_ci(field, bootstrap_options(o, method), o.cfg.seed);
  std::ofstream file;
  std::ostream& out = output_stream(o.out, file);
  out << "parameter,estimate,lower,median,upper,proxy\n";
  for (std::size_t p = 0; p < res.intervals.size(); ++p) {
    const auto& iv = res.intervals[p];
    out << fmt::format("{},{},{},{},{},{}\n", stou::parameter_name(iv.parameter), iv.point, iv.lower, iv.median,
                       iv.upper, stou::coverage_proxy(res.estimates[p], iv.point, o.cfg.level));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian STOU field simulation and confidence interval experiments"};
  app.require_subcommand(1);

  Options o;
  o.cfg.workers = stou::default_workers();

  auto config = std::make_shared<FlatConfig>();
  app.config_formatter(config);
  app.set_config("--config", "", "flat key = value config file; command-line flags win");
  app.fallthrough();
  app.allow_config_extras(false);

  auto* simulate = app.add_subcommand("simulate", "simulate one field and write it as CSV");
  add_truth(simulate, o);
  add_lattice(simulate, o, true);
  simulate->add_option("--method", o.sim_method, "exact or grid")->capture_default_str();
  simulate->add_option("--truncation-p", o.cfg.truncation_p, "grid kernel truncation steps")->capture_default_str();
  simulate->add_option("--cells-per-obs", o.cfg.cells_per_obs_cell, "grid mesh subdivision")->capture_default_str();
  simulate->add_option("--out", o.out, "output file (default field.csv, - for stdout)");
  add_run(simulate, o);

  auto* fit_mm = app.add_subcommand("fit-mm", "moments-matching fit of a field file");
  fit_mm->add_option("--field", o.field, "field CSV")->required();
  add_lattice(fit_mm, o, false);
  fit_mm->add_option("--max-lag", o.cfg.max_lag, "ACF lags")->capture_default_str();
  fit_mm->add_option("--out", o.out, "output file (default stdout)");

  auto* fit_cl = app.add_subcommand("fit-cl", "pairwise composite likelihood fit with sandwich standard errors");
  fit_cl->add_option("--field", o.field, "field CSV")->required();
  add_lattice(fit_cl, o, false);
  add_cl(fit_cl, o);
  fit_cl->add_option("--level", o.cfg.level, "nominal coverage")->capture_default_str();
  fit_cl->add_option("--out", o.out, "output file (default stdout)");

  auto* ci = app.add_subcommand("ci", "confidence intervals for one field");
  ci->add_option("--field", o.field, "field CSV")->required();
  add_lattice(ci, o, false);
  ci->add_option("--method", o.method, "cl-sandwich, mc-exact or mc-grid")->capture_default_str();
  ci->add_option("--level", o.cfg.level, "nominal coverage")->capture_default_str();
  add_cl(ci, o);
  add_mc(ci, o);
  ci->add_option("--out", o.out, "output file (default stdout)");
  add_run(ci, o);

  auto add_experiment = [&](CLI::App* cmd) {
    add_truth(cmd, o);
    add_lattice(cmd, o, true);
    cmd->add_option("--method", o.method, "cl-sandwich, mc-exact or mc-grid")->capture_default_str();
    cmd->add_option("--n-datasets", o.cfg.n_datasets, "replicated data sets")->capture_default_str();
    cmd->add_option("--level", o.cfg.level, "nominal coverage")->capture_default_str();
    add_cl(cmd, o);
    add_mc(cmd, o);
    cmd->add_option("--out", o.out, "output directory");
    add_run(cmd, o);
  };
  auto* coverage = app.add_subcommand("coverage", "interval coverage over replicated exact data sets");
  add_experiment(coverage);
  auto* proxy = app.add_subcommand("proxy", "coverage proxies, for one field (--field) or replicated data sets");
  add_experiment(proxy);
  proxy->add_option("--field", o.field, "field CSV; omit to simulate data sets from the truth");

  for (int i = 1; i < argc && config->subcommand.empty(); ++i) {
    for (const CLI::App* sub : app.get_subcommands({})) {
      if (sub->get_name() == argv[i]) config->subcommand = argv[i];
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*simulate) {
      if (o.out.empty()) o.out = "field.csv";
      return cmd_simulate(o);
    }
    if (*fit_mm) return cmd_fit_mm(o);
    if (*fit_cl) return cmd_fit_cl(o);
    if (*ci) return cmd_ci(o);
    if (*coverage) return cmd_experiment(o, stou::TableKind::Coverage, "coverage");
    if (*proxy) return o.field.empty() ? cmd_experiment(o, stou::TableKind::Proxy, "proxy") : cmd_proxy_field(o);
  } catch (const stou::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const bool config = e.kind() == stou::ErrorKind::ConfigInvalid || e.kind() == stou::ErrorKind::InvalidArgument;
    return config ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
