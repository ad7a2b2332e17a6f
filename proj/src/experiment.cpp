#include "stou/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "stou/errors.hpp"

namespace stou {

namespace {

constexpr std::string_view kVersion = "1.0.0";

void require(bool ok, std::string_view field, std::string_view what) {
  if (!ok) throw Error(ErrorKind::ConfigInvalid, fmt::format("{}: {}", field, what));
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::string_view method_name(CiMethod method) noexcept {
  switch (method) {
    case CiMethod::ClSandwich: return "cl-sandwich";
    case CiMethod::McExact: return "mc-exact";
    case CiMethod::McGrid: return "mc-grid";
  }
  return "?";
}

std::optional<CiMethod> parse_method(std::string_view name) noexcept {
  for (CiMethod m : {CiMethod::ClSandwich, CiMethod::McExact, CiMethod::McGrid}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  require(positive(lambda), "lambda", "must be > 0");
  require(positive(c), "c", "must be > 0");
  require(positive(tau), "tau", "must be > 0");
  require(std::isfinite(mu_seed), "mu-seed", "must be finite");
  require(nx >= 2, "nx", "must be >= 2");
  require(nt >= 2, "nt", "must be >= 2");
  require(positive(dx), "dx", "must be > 0");
  require(positive(dt), "dt", "must be > 0");
  require(n_datasets >= 10, "n-datasets", "must be >= 10");
  require(workers >= 1, "workers", "must be >= 1");
  require(max_lag >= 1, "max-lag", "must be >= 1");
  require(static_cast<std::size_t>(nx) * static_cast<std::size_t>(nt) <= max_points, "max-points",
          "lattice exceeds the dense simulation budget");
  if (method == CiMethod::ClSandwich) {
    require(level > 0.0 && level < 1.0, "level", "must be in (0, 1)");
    require(cutoff_d >= 1, "cutoff", "must be >= 1");
    require(window_nx >= 2 && window_nt >= 2, "window", "extents must be >= 2");
    require(step_x >= 1 && step_t >= 1, "window-step", "strides must be >= 1");
    require(window_nx <= nx && window_nt <= nt, "window", "no window fits in the lattice");
    try {
      EstimationScenario::parse(scenario, ThetaCL{});
    } catch (const Error& e) {
      require(false, "scenario", e.what());
    }
  } else {
    require(level >= 0.0 && level < 1.0, "level", "must be in [0, 1)");
    require(replications >= 20, "B", "must be >= 20");
    if (method == CiMethod::McGrid) {
      require(truncation_p >= 1, "truncation-p", "must be >= 1");
      require(cells_per_obs_cell >= 1, "cells-per-obs", "must be >= 1");
    }
  }
}

StouParams ExperimentConfig::truth() const { return StouParams::from_natural(lambda, c, mu_seed, tau * tau); }

Lattice ExperimentConfig::lattice() const { return Lattice(nx, nt, dx, dt); }

CoverageOptions ExperimentConfig::coverage_options() const {
  CoverageOptions o;
  o.method = method;
  o.n_datasets = n_datasets;
  o.level = level;
  o.seed = seed;
  o.workers = workers;
  o.max_points = max_points;
  o.replications = replications;
  o.max_lag = max_lag;
  o.grid = GridSimConfig{truncation_p, cells_per_obs_cell};
  if (method == CiMethod::ClSandwich) o.free = EstimationScenario::parse(scenario, ThetaCL{}).free;
  o.weights = PairWeightSpec{cutoff_d, true};
  o.windows = WindowSpec{window_nx, window_nt, step_x, step_t};
  return o;
}

void write_estimates_csv(std::ostream& out, const CoverageReport& report) {
  out << "dataset,sub_seed,parameter,true_value,estimate,lower,upper,hit,failed,error\n";
  for (const DatasetRecord& rec : report.datasets) {
    if (rec.failed) {
      std::string err = rec.error;
      for (char& ch : err) {
        if (ch == '"' || ch == '\n' || ch == ',') ch = ' ';
      }
      out << fmt::format("{},{},,,,,,,1,{}\n", rec.dataset, rec.sub_seed, err);
      continue;
    }
    for (const IntervalEstimate& iv : rec.intervals) {
      const double truth = [&] {
        for (const CoverageRow& row : report.rows) {
          if (row.parameter == iv.parameter) return row.true_value;
        }
        return std::nan("");
      }();
      out << fmt::format("{},{},{},{},{},{},{},{},0,\n", rec.dataset, rec.sub_seed, parameter_name(iv.parameter),
                         truth, iv.point, iv.lower, iv.upper, iv.contains(truth) ? 1 : 0);
    }
  }
}

void write_coverage_csv(std::ostream& out, const CoverageReport& report, TableKind kind) {
  if (kind == TableKind::Coverage) {
    out << "parameter,coverage,se,n\n";
    for (const CoverageRow& row : report.rows) {
      out << fmt::format("{},{:.1f},{:.1f},{}\n", parameter_name(row.parameter), 100.0 * row.rate, 100.0 * row.se,
                         row.datasets);
    }
  } else {
    out << "parameter,proxy,se,n\n";
    for (const CoverageRow& row : report.rows) {
      out << fmt::format("{},{:.1f},{:.1f},{}\n", parameter_name(row.parameter), 100.0 * row.mean_proxy,
                         100.0 * row.proxy_se, row.proxy_count);
    }
  }
}

void write_manifest(std::ostream& out, const ExperimentConfig& cfg, std::string_view command, double wall_seconds,
                    int failed_datasets) {
  out << fmt::format("command = {}\n", command);
  out << fmt::format("version = {}\n", kVersion);
  out << fmt::format("compiler = {}\n", __VERSION__);
  out << fmt::format("lambda = {}\nc = {}\ntau = {}\nmu-seed = {}\n", cfg.lambda, cfg.c, cfg.tau, cfg.mu_seed);
  out << fmt::format("nx = {}\nnt = {}\ndx = {}\ndt = {}\n", cfg.nx, cfg.nt, cfg.dx, cfg.dt);
  out << fmt::format("method = {}\n", method_name(cfg.method));
  if (cfg.method == CiMethod::ClSandwich) {
    out << fmt::format("scenario = {}\ncutoff = {}\n", cfg.scenario, cfg.cutoff_d);
    out << fmt::format("window-nx = {}\nwindow-nt = {}\nstep-x = {}\nstep-t = {}\n", cfg.window_nx, cfg.window_nt,
                       cfg.step_x, cfg.step_t);
  } else {
    out << fmt::format("B = {}\nmax-lag = {}\n", cfg.replications, cfg.max_lag);
    if (cfg.method == CiMethod::McGrid) {
      out << fmt::format("truncation-p = {}\ncells-per-obs = {}\n", cfg.truncation_p, cfg.cells_per_obs_cell);
    }
  }
  out << fmt::format("n-datasets = {}\nlevel = {}\nmax-points = {}\n", cfg.n_datasets, cfg.level, cfg.max_points);
  out << fmt::format("seed = {}\n", cfg.seed);
  out << "seed-derivation = splitmix64 chain over (seed, dataset, replication); data set d uses replication 0, "
         "bootstrap replication r uses r + 1\n";
  out << fmt::format("workers = {}\n", cfg.workers);
  out << fmt::format("failed-datasets = {}\n", failed_datasets);
  out << fmt::format("wall-clock-seconds = {:.3f}\n", wall_seconds);
}

CoverageReport run_experiment(const ExperimentConfig& config, TableKind kind, std::string_view command) {
  config.validate();
  if (kind == TableKind::Proxy) {
    require(config.method != CiMethod::ClSandwich, "method", "coverage proxies need a Monte Carlo method");
  }
  const auto started = std::chrono::steady_clock::now();
  const CoverageReport report = coverage_experiment(config.truth(), config.lattice(), config.coverage_options());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const std::filesystem::path dir(config.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + config.output + "'");
  {
    auto out = open_output(dir / "estimates.csv");
    write_estimates_csv(out, report);
  }
  {
    auto out = open_output(dir / "coverage.csv");
    write_coverage_csv(out, report, kind);
  }
  {
    auto out = open_output(dir / "manifest.txt");
    write_manifest(out, config, command, wall, report.failed_datasets);
  }
  return report;
}

}  // namespace stou
