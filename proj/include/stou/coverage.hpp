#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stou/ci_bootstrap.hpp"
#include "stou/estimate_cl.hpp"
#include "stou/interval.hpp"
#include "stou/model.hpp"

namespace stou {

enum class CiMethod { ClSandwich, McExact, McGrid };

struct CoverageOptions {
  CiMethod method = CiMethod::McExact;
  int n_datasets = 100;
  double level = 0.95;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::size_t max_points = kDefaultMaxPoints;

  // Monte Carlo methods.
  int replications = 100;
  int max_lag = kDefaultMaxLag;
  GridSimConfig grid{};
  double max_failure_rate = 0.10;

  // Composite likelihood. Fixed coordinates are pinned at the truth.
  std::array<bool, 4> free{true, true, false, false};
  PairWeightSpec weights{};
  WindowSpec windows{};
  NelderMeadOptions optimizer{};

  void validate() const;
};

struct DatasetRecord {
  int dataset = 0;
  std::uint64_t sub_seed = 0;  // stream that generated the data set
  bool failed = false;
  std::string error;
  std::vector<IntervalEstimate> intervals;
  std::vector<double> proxies;  // Monte Carlo methods: coverage proxy per interval
};

struct CoverageRow {
  Parameter parameter = Parameter::Lambda;
  double true_value = 0.0;
  double nominal = 0.95;
  int datasets = 0;      // data sets with an interval for this parameter
  int hits = 0;
  double rate = 0.0;     // hits / datasets
  double se = 0.0;       // sqrt(rate (1 - rate) / datasets)
  int proxy_count = 0;
  double mean_proxy = 0.0;
  double proxy_se = 0.0;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
  std::vector<DatasetRecord> datasets;
  int failed_datasets = 0;
};

/// Binomial standard error sqrt(p (1 - p) / n).
double binomial_se(double rate, int n) noexcept;

/// Simulates n_datasets fields from `truth` with the exact simulator (data
/// set d uses stream derive_seed(seed, d, 0)), builds an interval for each
/// with the chosen method and reports the share of intervals containing the
/// true value. Data sets are processed concurrently; results are collected
/// in data set order so the report does not depend on the worker count.
CoverageReport coverage_experiment(const StouParams& truth, const Lattice& lattice, const CoverageOptions& options);

}  // namespace stou
