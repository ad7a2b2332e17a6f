#include "stou/coverage.hpp"

#include <cmath>
#include <map>

#include "stou/errors.hpp"
#include "stou/parallel.hpp"
#include "stou/random.hpp"
#include "stou/sim_cholesky.hpp"

namespace stou {

void CoverageOptions::validate() const {
  if (n_datasets < 10) throw Error(ErrorKind::InvalidArgument, "n_datasets must be >= 10");
  if (method == CiMethod::ClSandwich) {
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "level must be in (0, 1)");
    weights.validate();
    windows.validate();
    bool any = false;
    for (bool f : free) any = any || f;
    if (!any) throw Error(ErrorKind::InvalidArgument, "scenario must free at least one parameter");
  } else {
    BootstrapOptions b;
    b.replications = replications;
    b.level = level;
    b.max_lag = max_lag;
    b.grid = grid;
    b.max_failure_rate = max_failure_rate;
    b.simulator = method == CiMethod::McGrid ? SimulatorKind::Grid : SimulatorKind::Exact;
    b.validate();
  }
}

double binomial_se(double rate, int n) noexcept {
  if (n <= 0) return 0.0;
  return std::sqrt(rate * (1.0 - rate) / n);
}

CoverageReport coverage_experiment(const StouParams& truth, const Lattice& lattice, const CoverageOptions& options) {
  options.validate();
  const ExactSimulator data_simulator(truth, lattice, options.max_points);

  BootstrapOptions boot;
  boot.replications = options.replications;
  boot.level = options.level;
  boot.simulator = options.method == CiMethod::McGrid ? SimulatorKind::Grid : SimulatorKind::Exact;
  boot.grid = options.grid;
  boot.max_lag = options.max_lag;
  boot.max_points = options.max_points;
  boot.max_failure_rate = options.max_failure_rate;
  boot.workers = 1;

  EstimationScenario scenario;
  scenario.free = options.free;
  scenario.fixed_values = ThetaCL::from_params(truth);

  const auto n = static_cast<std::size_t>(options.n_datasets);
  std::vector<DatasetRecord> records(n);
  parallel_for(n, options.workers, [&](std::size_t d) {
    DatasetRecord& rec = records[d];
    rec.dataset = static_cast<int>(d);
    rec.sub_seed = derive_seed(options.seed, d, 0);
    try {
      Rng rng = make_stream(rec.sub_seed);
      const FieldSample field = data_simulator.simulate(rng);
      if (options.method == CiMethod::ClSandwich) {
        rec.intervals = sandwich_ci(field, options.weights, options.windows, scenario, options.level, std::nullopt,
                                    options.optimizer)
                            .intervals;
      } else {
        const BootstrapResult res = mc_ci(field, boot, options.seed, d);
        rec.intervals = res.intervals;
        for (std::size_t p = 0; p < res.intervals.size(); ++p) {
          rec.proxies.push_back(res.estimates[p].size() >= 20
                                    ? coverage_proxy(res.estimates[p], res.intervals[p].point, options.level)
                                    : std::nan(""));
        }
      }
    } catch (const Error& e) {
      rec.failed = true;
      rec.error = e.what();
      rec.intervals.clear();
      rec.proxies.clear();
    }
  });

  CoverageReport report;
  std::map<Parameter, CoverageRow> rows;
  std::map<Parameter, double> proxy_sq;
  for (const DatasetRecord& rec : records) {
    if (rec.failed) {
      ++report.failed_datasets;
      continue;
    }
    for (std::size_t i = 0; i < rec.intervals.size(); ++i) {
      const IntervalEstimate& iv = rec.intervals[i];
      CoverageRow& row = rows[iv.parameter];
      row.parameter = iv.parameter;
      row.true_value = parameter_value(truth, iv.parameter);
      row.nominal = options.level;
      ++row.datasets;
      row.hits += iv.contains(row.true_value) ? 1 : 0;
      if (i < rec.proxies.size() && std::isfinite(rec.proxies[i])) {
        ++row.proxy_count;
        row.mean_proxy += rec.proxies[i];
        proxy_sq[iv.parameter] += rec.proxies[i] * rec.proxies[i];
      }
    }
  }
  for (Parameter p : kAllParameters) {
    auto it = rows.find(p);
    if (it == rows.end()) continue;
    CoverageRow row = it->second;
    row.rate = static_cast<double>(row.hits) / row.datasets;
    row.se = binomial_se(row.rate, row.datasets);
    if (row.proxy_count > 0) {
      const double k = row.proxy_count;
      row.mean_proxy /= k;
      const double var = k > 1 ? std::max(0.0, (proxy_sq[p] - k * row.mean_proxy * row.mean_proxy) / (k - 1)) : 0.0;
      row.proxy_se = std::sqrt(var / k);
    }
    report.rows.push_back(row);
  }
  report.datasets = std::move(records);
  return report;
}

}  // namespace stou
