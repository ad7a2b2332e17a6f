#include "stou/ci_bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "stou/errors.hpp"
#include "stou/parallel.hpp"
#include "stou/random.hpp"

namespace stou {

void BootstrapOptions::validate() const {
  if (replications < 20) throw Error(ErrorKind::InvalidArgument, "bootstrap count B must be >= 20");
  if (!(level >= 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "level must be in [0, 1)");
  if (max_lag < 1) throw Error(ErrorKind::InvalidArgument, "max_lag must be >= 1");
  if (!(max_failure_rate >= 0.0 && max_failure_rate <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "max_failure_rate must be in [0, 1]");
  }
  if (simulator == SimulatorKind::Grid) grid.validate();
}

double quantile_linear(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorKind::InvalidArgument, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::InvalidArgument, "quantile level must be in [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);  // 0-based
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double ecdf(std::span<const double> sorted, double x) {
  if (sorted.empty()) return 0.0;
  const auto count = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
  return static_cast<double>(count) / static_cast<double>(sorted.size());
}

std::unique_ptr<FieldSimulator> make_simulator(SimulatorKind kind, const StouParams& params, const Lattice& lattice,
                                               const GridSimConfig& grid, std::size_t max_points) {
  if (kind == SimulatorKind::Exact) return std::make_unique<ExactSimulator>(params, lattice, max_points);
  return std::make_unique<GridSimulator>(params, lattice, grid);
}

BootstrapResult mc_ci(const FieldSample& field, const BootstrapOptions& options, std::uint64_t master_seed,
                      std::uint64_t dataset) {
  options.validate();
  const StouParams fitted = fit_mm(field, options.max_lag);
  const auto simulator = make_simulator(options.simulator, fitted, field.lattice(), options.grid, options.max_points);

  const auto b = static_cast<std::size_t>(options.replications);
  std::vector<std::optional<StouParams>> refits(b);
  parallel_for(b, options.workers, [&](std::size_t r) {
    Rng rng = make_stream(derive_seed(master_seed, dataset, r + 1));
    const FieldSample sim = simulator->simulate(rng);
    try {
      refits[r] = fit_mm(sim, options.max_lag);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateSample && e.kind() != ErrorKind::InsufficientUsableLags) throw;
    }
  });

  BootstrapResult out{fitted, {}, {}, 0};
  out.estimates.resize(kMonteCarloParameters.size());
  for (const auto& refit : refits) {
    if (!refit) {
      ++out.dropped;
      continue;
    }
    for (std::size_t p = 0; p < kMonteCarloParameters.size(); ++p) {
      out.estimates[p].push_back(parameter_value(*refit, kMonteCarloParameters[p]));
    }
  }
  if (static_cast<double>(out.dropped) > options.max_failure_rate * static_cast<double>(b)) {
    throw Error(ErrorKind::FailureRateExceeded,
                std::to_string(out.dropped) + " of " + std::to_string(b) + " bootstrap refits failed");
  }
  if (out.estimates.front().empty()) throw Error(ErrorKind::FailureRateExceeded, "every bootstrap refit failed");

  const double q_lo = 0.5 * (1.0 - options.level);
  const double q_hi = 0.5 * (1.0 + options.level);
  for (std::size_t p = 0; p < kMonteCarloParameters.size(); ++p) {
    std::vector<double> sorted = out.estimates[p];
    std::sort(sorted.begin(), sorted.end());
    out.intervals.push_back({kMonteCarloParameters[p], parameter_value(fitted, kMonteCarloParameters[p]),
                             quantile_linear(sorted, q_lo), quantile_linear(sorted, q_hi),
                             quantile_linear(sorted, 0.5), options.level});
  }
  return out;
}

double coverage_proxy(std::span<const double> estimates, double theta_e, double level) {
  if (estimates.size() < 20) throw Error(ErrorKind::InvalidArgument, "coverage proxy needs >= 20 estimates");
  if (!(level >= 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "level must be in [0, 1)");
  std::vector<double> sorted(estimates.begin(), estimates.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = quantile_linear(sorted, 0.5 * (1.0 - level));
  const double med = quantile_linear(sorted, 0.5);
  const double hi = quantile_linear(sorted, 0.5 * (1.0 + level));
  const double upper = theta_e + (med - lo);
  const double lower = theta_e - (hi - med);
  const auto first = std::lower_bound(sorted.begin(), sorted.end(), lower);
  const auto last = std::upper_bound(sorted.begin(), sorted.end(), upper);
  if (last <= first) return 0.0;
  return static_cast<double>(last - first) / static_cast<double>(sorted.size());
}

}  // namespace stou
