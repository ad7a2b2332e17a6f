#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "stou/estimate_mm.hpp"
#include "stou/interval.hpp"
#include "stou/model.hpp"
#include "stou/sim_cholesky.hpp"
#include "stou/sim_grid.hpp"

namespace stou {

enum class SimulatorKind { Exact, Grid };

struct BootstrapOptions {
  int replications = 100;  // B
  double level = 0.95;
  SimulatorKind simulator = SimulatorKind::Exact;
  GridSimConfig grid{};
  int max_lag = kDefaultMaxLag;
  std::size_t max_points = kDefaultMaxPoints;
  double max_failure_rate = 0.10;
  unsigned workers = 1;

  void validate() const;
};

struct BootstrapResult {
  StouParams fitted;
  /// kMonteCarloParameters order.
  std::vector<IntervalEstimate> intervals;
  /// Re-estimates per parameter (same order as intervals), successful
  /// replications only, in replication order.
  std::vector<std::vector<double>> estimates;
  int dropped = 0;
};

/// Linear interpolation between order statistics at 1-based position
/// 1 + (B - 1) q. `sorted` must be ascending and non-empty.
double quantile_linear(std::span<const double> sorted, double q);

/// #{estimates <= x} / B.
double ecdf(std::span<const double> sorted, double x);

/// Builds a simulator for `params` on `lattice` per the options.
std::unique_ptr<FieldSimulator> make_simulator(SimulatorKind kind, const StouParams& params, const Lattice& lattice,
                                               const GridSimConfig& grid, std::size_t max_points);

/// Parametric bootstrap interval. Fits the field by moments matching,
/// simulates B fields from the fit on the same lattice (replication r uses
/// stream derive_seed(master_seed, dataset, r + 1)), refits each, and reads
/// lower / median / upper off the (1 - level)/2, 1/2, (1 + level)/2
/// quantiles of the re-estimates. Replications whose refit fails are dropped
/// and counted; more than max_failure_rate dropped raises FailureRateExceeded.
BootstrapResult mc_ci(const FieldSample& field, const BootstrapOptions& options, std::uint64_t master_seed,
                      std::uint64_t dataset = 0);

/// ECDF-based coverage proxy: the share of re-estimates in
/// [theta_E - (theta_U - theta_M), theta_E + (theta_M - theta_L)], i.e.
/// ECDF(theta_E + (theta_M - theta_L)) - ECDF((theta_E - (theta_U - theta_M))^-).
/// Needs at least 20 estimates.
double coverage_proxy(std::span<const double> estimates, double theta_e, double level = 0.95);

}  // namespace stou
