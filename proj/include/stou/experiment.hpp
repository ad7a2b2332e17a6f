#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "stou/coverage.hpp"

namespace stou {

std::string_view method_name(CiMethod method) noexcept;  // cl-sandwich, mc-exact, mc-grid
std::optional<CiMethod> parse_method(std::string_view name) noexcept;

/// Everything a coverage / proxy run needs. Field names match the CLI flags
/// and the keys of the flat config file.
struct ExperimentConfig {
  // truth, seed parameterization
  double lambda = 1.0;
  double c = 1.0;
  double tau = 0.1;
  double mu_seed = 0.2;
  // lattice
  int nx = 41;
  int nt = 41;
  double dx = 0.05;
  double dt = 0.05;
  // interval construction
  CiMethod method = CiMethod::McExact;
  std::string scenario = "lambda,c_tilde";
  int replications = 100;
  int n_datasets = 100;
  double level = 0.95;
  int max_lag = kDefaultMaxLag;
  int cutoff_d = 3;
  int window_nx = 11;
  int window_nt = 11;
  int step_x = 5;
  int step_t = 5;
  int truncation_p = 300;
  int cells_per_obs_cell = 1;
  std::size_t max_points = kDefaultMaxPoints;
  // run
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string output = ".";

  /// Throws ConfigInvalid naming the offending field.
  void validate() const;
  StouParams truth() const;
  Lattice lattice() const;
  CoverageOptions coverage_options() const;
};

enum class TableKind { Coverage, Proxy };

/// dataset,sub_seed,parameter,true_value,estimate,lower,upper,hit,failed,error
void write_estimates_csv(std::ostream& out, const CoverageReport& report);
/// parameter,coverage,se,n (or parameter,proxy,se,n); rates in percent.
void write_coverage_csv(std::ostream& out, const CoverageReport& report, TableKind kind);
void write_manifest(std::ostream& out, const ExperimentConfig& config, std::string_view command,
                    double wall_seconds, int failed_datasets);

/// Runs the experiment and writes estimates.csv, coverage.csv and
/// manifest.txt into config.output (created if missing).
CoverageReport run_experiment(const ExperimentConfig& config, TableKind kind, std::string_view command);

}  // namespace stou
