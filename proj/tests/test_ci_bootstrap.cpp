#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "stou/ci_bootstrap.hpp"
#include "stou/coverage.hpp"
#include "stou/errors.hpp"
#include "stou/random.hpp"

using namespace stou;

namespace {

const StouParams kTruth = StouParams::from_natural(1.0, 1.0, 0.2, 0.01);

FieldSample sample(const Lattice& lat, std::uint64_t seed) {
  const ExactSimulator sim(kTruth, lat);
  Rng rng = make_stream(seed);
  return sim.simulate(rng);
}

const IntervalEstimate& find(const BootstrapResult& r, Parameter p) {
  for (const auto& iv : r.intervals)
    if (iv.parameter == p) return iv;
  FAIL("missing parameter");
  return r.intervals.front();
}

}  // namespace

TEST_CASE("linear-interpolation quantiles") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(quantile_linear(v, 0.025) == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(quantile_linear(v, 0.975) == doctest::Approx(4.9).epsilon(1e-14));
  CHECK(quantile_linear(v, 0.5) == 3.0);
  CHECK(quantile_linear(v, 0.0) == 1.0);
  CHECK(quantile_linear(v, 1.0) == 5.0);
  const std::vector<double> same(30, 2.5);
  CHECK(quantile_linear(same, 0.025) == 2.5);
  CHECK(quantile_linear(same, 0.975) == 2.5);
  CHECK_THROWS_AS(quantile_linear(std::vector<double>{}, 0.5), Error);
}

TEST_CASE("right-continuous ecdf") {
  const std::vector<double> v{1, 2, 2, 3};
  CHECK(ecdf(v, 0.5) == 0.0);
  CHECK(ecdf(v, 2.0) == 0.75);
  CHECK(ecdf(v, 3.0) == 1.0);
}

TEST_CASE("coverage proxy with identical estimates") {
  const std::vector<double> same(25, 0.7);
  CHECK(coverage_proxy(same, 0.7) == 1.0);
  CHECK(coverage_proxy(same, 0.71) == 0.0);
  CHECK(coverage_proxy(same, 0.69) == 0.0);
  CHECK_THROWS_AS(coverage_proxy(std::vector<double>(19, 1.0), 1.0), Error);
}

TEST_CASE("coverage proxy with symmetric estimates") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (int b : {40, 100, 401}) {
    std::vector<double> est;
    for (int i = 0; i < b / 2; ++i) {
      const double e = z(rng);
      est.push_back(2.0 + e);
      est.push_back(2.0 - e);
    }
    if (b % 2 == 1) est.push_back(2.0);
    std::sort(est.begin(), est.end());
    const double lo = quantile_linear(est, 0.025), hi = quantile_linear(est, 0.975);
    const double proxy = coverage_proxy(est, 2.0);
    CHECK(std::abs(proxy - (ecdf(est, hi) - ecdf(est, lo))) <= 2.0 / est.size());
    CHECK(std::abs(proxy - 0.95) <= 2.0 / est.size() + 0.0125);
  }
}

TEST_CASE("coverage proxy range and affine invariance") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> est(50);
    for (double& e : est) e = std::exp(0.5 * z(rng));
    const double theta_e = 1.0 + u(rng);
    const double p = coverage_proxy(est, theta_e);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    std::vector<double> t(est.size());
    for (std::size_t k = 0; k < est.size(); ++k) t[k] = 4.0 * est[k] - 3.0;
    CHECK(coverage_proxy(t, 4.0 * theta_e - 3.0) == p);
  }
}

TEST_CASE("binomial standard error") {
  CHECK(binomial_se(0.9, 100) == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(binomial_se(0.0, 100) == 0.0);
}

TEST_CASE("bootstrap options validation") {
  BootstrapOptions o;
  o.replications = 19;
  CHECK_THROWS_AS(o.validate(), Error);
  o.replications = 20;
  CHECK_NOTHROW(o.validate());
  o.level = 1.0;
  CHECK_THROWS_AS(o.validate(), Error);
}

TEST_CASE("mc_ci is reproducible and independent of the worker count") {
  const FieldSample f = sample(Lattice(15, 15, 0.05, 0.05), 3);
  BootstrapOptions o;
  o.replications = 40;
  const auto a = mc_ci(f, o, 17);
  const auto b = mc_ci(f, o, 17);
  o.workers = 3;
  const auto c = mc_ci(f, o, 17);
  REQUIRE(a.intervals.size() == kMonteCarloParameters.size());
  for (std::size_t p = 0; p < a.intervals.size(); ++p) {
    CHECK(a.estimates[p] == b.estimates[p]);
    CHECK(a.estimates[p] == c.estimates[p]);
    CHECK(a.intervals[p].lower == c.intervals[p].lower);
    CHECK(a.intervals[p].upper == c.intervals[p].upper);
    CHECK(a.intervals[p].lower <= a.intervals[p].median);
    CHECK(a.intervals[p].median <= a.intervals[p].upper);
    CHECK(a.estimates[p].size() == 40u - static_cast<std::size_t>(a.dropped));
  }
  const auto d = mc_ci(f, o, 18);
  CHECK(d.estimates[0] != a.estimates[0]);
  const auto e = mc_ci(f, o, 17, 1);
  CHECK(e.estimates[0] != a.estimates[0]);
}

TEST_CASE("mc_ci equivariance") {
  const Lattice lat(15, 15, 0.05, 0.05);
  const FieldSample f = sample(lat, 5);
  BootstrapOptions o;
  o.replications = 30;
  const auto base = mc_ci(f, o, 99);

  const double k = 4.0;
  const auto scaled = mc_ci(FieldSample(lat, f.values() * k), o, 99);
  for (std::size_t p = 0; p < base.intervals.size(); ++p) {
    const Parameter par = base.intervals[p].parameter;
    double factor = 1.0;
    if (par == Parameter::Mu || par == Parameter::MuSeed || par == Parameter::Tau) factor = k;
    if (par == Parameter::Sigma2) factor = k * k;
    CHECK(scaled.intervals[p].lower == doctest::Approx(factor * base.intervals[p].lower).epsilon(1e-12));
    CHECK(scaled.intervals[p].upper == doctest::Approx(factor * base.intervals[p].upper).epsilon(1e-12));
    CHECK(scaled.intervals[p].point == doctest::Approx(factor * base.intervals[p].point).epsilon(1e-12));
  }

  const double a = 1.5;
  const auto shifted = mc_ci(FieldSample(lat, f.values().array() + a), o, 99);
  for (Parameter par : {Parameter::Lambda, Parameter::C, Parameter::Tau, Parameter::Sigma2}) {
    CHECK(find(shifted, par).lower == doctest::Approx(find(base, par).lower).epsilon(1e-8));
    CHECK(find(shifted, par).upper == doctest::Approx(find(base, par).upper).epsilon(1e-8));
  }
  CHECK(find(shifted, Parameter::Mu).lower == doctest::Approx(find(base, Parameter::Mu).lower + a).epsilon(1e-10));
  CHECK(find(shifted, Parameter::Mu).upper == doctest::Approx(find(base, Parameter::Mu).upper + a).epsilon(1e-10));
  const double seed_shift = base.fitted.lambda() * base.fitted.c_tilde() * a / 2.0;
  CHECK(find(shifted, Parameter::MuSeed).point ==
        doctest::Approx(find(base, Parameter::MuSeed).point + seed_shift).epsilon(1e-10));
}

TEST_CASE("failed refits are dropped and counted") {
  // A white-noise field fits to a very short range, so many re-simulated
  // fields have no positive lag correlation on some axis.
  const Lattice lat(4, 4, 0.05, 0.05);
  std::normal_distribution<double> z;
  std::uint64_t seed = 0;
  FieldMatrix v(4, 4);
  for (;; ++seed) {
    Rng rng(seed);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = z(rng);
    try {
      fit_mm(FieldSample(lat, v), 2);
      break;
    } catch (const Error&) {
    }
  }
  const FieldSample f(lat, v);
  BootstrapOptions o;
  o.replications = 50;
  o.max_lag = 2;
  try {
    mc_ci(f, o, 1);
    FAIL("expected FailureRateExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FailureRateExceeded);
  }
  o.max_failure_rate = 1.0;
  const auto r = mc_ci(f, o, 1);
  CHECK(r.dropped > 5);
  CHECK(r.estimates[0].size() == static_cast<std::size_t>(50 - r.dropped));
}

TEST_CASE("coverage experiment bookkeeping") {
  const Lattice lat(11, 11, 0.05, 0.05);
  CoverageOptions o;
  o.n_datasets = 10;
  o.replications = 20;
  o.seed = 3;
  const auto rep = coverage_experiment(kTruth, lat, o);
  REQUIRE(rep.datasets.size() == 10);
  REQUIRE(rep.rows.size() == kMonteCarloParameters.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    CHECK(row.parameter == kMonteCarloParameters[i]);
    CHECK(row.true_value == parameter_value(kTruth, row.parameter));
    CHECK(row.datasets + rep.failed_datasets == 10);
    CHECK(row.rate == doctest::Approx(static_cast<double>(row.hits) / row.datasets));
    CHECK(row.se == doctest::Approx(binomial_se(row.rate, row.datasets)));
    CHECK(row.mean_proxy >= 0.0);
    CHECK(row.mean_proxy <= 1.0);
  }
  for (std::size_t d = 0; d < rep.datasets.size(); ++d) {
    CHECK(rep.datasets[d].dataset == static_cast<int>(d));
    CHECK(rep.datasets[d].sub_seed == derive_seed(3, d, 0));
  }
  CoverageOptions bad = o;
  bad.n_datasets = 9;
  CHECK_THROWS_AS(coverage_experiment(kTruth, lat, bad), Error);
}

TEST_CASE("nominal level zero gives zero-width intervals") {
  CoverageOptions o;
  o.n_datasets = 10;
  o.replications = 21;
  o.level = 0.0;
  const auto rep = coverage_experiment(kTruth, Lattice(11, 11, 0.05, 0.05), o);
  for (const auto& d : rep.datasets) {
    for (const auto& iv : d.intervals) {
      CHECK(iv.lower == iv.median);
      CHECK(iv.upper == iv.median);
    }
  }
  for (const auto& row : rep.rows) CHECK(row.rate == 0.0);
}

TEST_CASE("grid bootstrap runs") {
  const FieldSample f = sample(Lattice(11, 11, 0.05, 0.05), 8);
  BootstrapOptions o;
  o.replications = 20;
  o.simulator = SimulatorKind::Grid;
  o.grid.truncation_p = 200;
  const auto r = mc_ci(f, o, 2);
  CHECK(r.intervals.size() == kMonteCarloParameters.size());
  CHECK(r.intervals[0].lower < r.intervals[0].upper);
}
