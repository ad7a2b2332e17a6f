#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "stou/errors.hpp"
#include "stou/estimate_mm.hpp"
#include "stou/random.hpp"
#include "stou/sim_cholesky.hpp"

using namespace stou;

namespace {

AcfEstimate exact_acf(Axis axis, double rate, double step, int max_lag) {
  AcfEstimate acf;
  acf.axis = axis;
  for (int h = 1; h <= max_lag; ++h) {
    acf.lags.push_back(h);
    acf.values.push_back(std::exp(-rate * h * step));
  }
  return acf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("perfect temporal persistence gives acf 1") {
  const Lattice lat(6, 8, 0.1, 0.1);
  FieldMatrix v(8, 6);
  for (int t = 0; t < 8; ++t)
    for (int x = 0; x < 6; ++x) v(t, x) = 0.3 * x * x - x;
  const FieldSample f(lat, v);
  const auto acf = empirical_acf(f, Axis::Temporal, 7);
  REQUIRE(acf.values.size() == 7);
  for (double r : acf.values) CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < acf.lags.size(); ++i) CHECK(acf.lags[i] == static_cast<int>(i) + 1);
}

TEST_CASE("single spike gives near-zero acf") {
  const int n = 60;
  const Lattice lat(n, n, 0.05, 0.05);
  FieldMatrix v = FieldMatrix::Constant(n, n, 2.0);
  v(30, 30) = 3.0;
  const FieldSample f(lat, v);
  for (Axis axis : {Axis::Temporal, Axis::Spatial}) {
    const auto acf = empirical_acf(f, axis, 5);
    for (double r : acf.values) {
      CHECK(std::abs(r) < 2e-3);
      CHECK(r >= -1.0);
      CHECK(r <= 1.0);
    }
  }
}

TEST_CASE("empirical_acf preconditions") {
  const Lattice lat(4, 3, 0.1, 0.1);
  const FieldSample flat(lat, FieldMatrix::Constant(3, 4, 1.5));
  CHECK_THROWS_AS(empirical_acf(flat, Axis::Temporal, 1), Error);
  try {
    empirical_acf(flat, Axis::Temporal, 1);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateSample);
  }
  FieldMatrix v(3, 4);
  v << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 13;
  const FieldSample f(lat, v);
  for (int bad : {0, 3}) {
    try {
      empirical_acf(f, Axis::Temporal, bad);
      FAIL("expected InvalidArgument");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
  }
  CHECK_NOTHROW(empirical_acf(f, Axis::Spatial, 3));
  try {
    fit_mm(flat);
    FAIL("expected DegenerateSample");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateSample);
  }
}

TEST_CASE("acf by hand on a 2x3 field") {
  const Lattice lat(3, 2, 1.0, 1.0);
  FieldMatrix v(2, 3);
  v << 1, 2, 4, 3, 0, 2;
  const FieldSample f(lat, v);
  const double mean = 2.0;
  double s2 = 0.0;
  for (double y : {1.0, 2.0, 4.0, 3.0, 0.0, 2.0}) s2 += (y - mean) * (y - mean);
  s2 /= 6.0;
  const auto m = sample_moments(f);
  CHECK(m.mean == doctest::Approx(mean));
  CHECK(m.variance == doctest::Approx(s2));
  // temporal lag 1: (1,3), (2,0), (4,2)
  const double rt = ((-1.0) * 1.0 + 0.0 * -2.0 + 2.0 * 0.0) / (3.0 * s2);
  CHECK(empirical_acf(f, Axis::Temporal, 1).values[0] == doctest::Approx(rt));
  // spatial lag 2: (1,4), (3,2)
  const double rs2 = ((-1.0) * 2.0 + 1.0 * 0.0) / (2.0 * s2);
  CHECK(empirical_acf(f, Axis::Spatial, 2).values[1] == doctest::Approx(rs2));
}

TEST_CASE("population-exact moments round trip") {
  const double dt = 0.05, dx = 0.05;
  const auto temporal = exact_acf(Axis::Temporal, 1.0, dt, 5);
  const auto spatial = exact_acf(Axis::Spatial, 1.0, dx, 5);
  const auto p = fit_mm_from_moments(temporal, spatial, dt, dx, {0.4, 0.005});
  CHECK(rel(p.lambda(), 1.0) < 1e-10);
  CHECK(rel(p.c(), 1.0) < 1e-10);
  CHECK(rel(p.mu_seed(), 0.2) < 1e-10);
  CHECK(rel(p.tau2(), 0.01) < 1e-10);
}

TEST_CASE("round trip over random parameters") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> logu(-1.5, 1.5);
  std::uniform_real_distribution<double> mu_d(-3.0, 3.0);
  std::uniform_int_distribution<int> lag_d(1, 8);
  for (int i = 0; i < 500; ++i) {
    const double lambda = std::exp(logu(rng));
    const double c = std::exp(logu(rng));
    const double mu_seed = mu_d(rng);
    const double tau2 = std::exp(logu(rng));
    const auto truth = StouParams::from_natural(lambda, c, mu_seed, tau2);
    const double dt = 0.01 * std::exp(logu(rng));
    const double dx = 0.01 * std::exp(logu(rng));
    const int L = lag_d(rng);
    const auto p = fit_mm_from_moments(exact_acf(Axis::Temporal, truth.lambda(), dt, L),
                                       exact_acf(Axis::Spatial, truth.c_tilde(), dx, L), dt, dx,
                                       {truth.mu(), truth.sigma2()});
    CHECK(rel(p.lambda(), lambda) < 1e-10);
    CHECK(rel(p.c(), c) < 1e-10);
    CHECK(rel(p.tau2(), tau2) < 1e-10);
    if (mu_seed != 0.0) CHECK(rel(p.mu_seed(), mu_seed) < 1e-10);
  }
}

TEST_CASE("unusable lags") {
  AcfEstimate neg;
  neg.lags = {1, 2, 3};
  neg.values = {-0.2, -0.1, -0.05};
  const auto good = exact_acf(Axis::Spatial, 1.0, 0.1, 3);
  try {
    fit_mm_from_moments(neg, good, 0.1, 0.1, {0.0, 1.0});
    FAIL("expected InsufficientUsableLags");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientUsableLags);
  }
  try {
    fit_mm_from_moments(good, neg, 0.1, 0.1, {0.0, 1.0});
    FAIL("expected InsufficientUsableLags");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientUsableLags);
  }

  // Checkerboard: lag-1 correlation is -1 on both axes.
  const Lattice lat(6, 6, 0.1, 0.1);
  FieldMatrix v(6, 6);
  for (int t = 0; t < 6; ++t)
    for (int x = 0; x < 6; ++x) v(t, x) = ((t + x) % 2 == 0) ? 1.0 : -1.0;
  try {
    fit_mm(FieldSample(lat, v), 1);
    FAIL("expected InsufficientUsableLags");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientUsableLags);
  }
}

TEST_CASE("lags outside (0, 1) are skipped") {
  auto t = exact_acf(Axis::Temporal, 2.0, 0.1, 4);
  t.values[1] = -0.3;
  t.values[3] = 1.0;
  const auto s = exact_acf(Axis::Spatial, 1.0, 0.1, 4);
  const auto p = fit_mm_from_moments(t, s, 0.1, 0.1, {0.0, 1.0});
  CHECK(rel(p.lambda(), 2.0) < 1e-12);
}

TEST_CASE("scale and shift equivariance") {
  const Lattice lat(21, 21, 0.05, 0.05);
  const ExactSimulator sim(StouParams::from_natural(1.0, 1.0, 0.2, 0.01), lat);
  Rng rng = make_stream(derive_seed(5, 0, 0));
  const FieldSample f = sim.simulate(rng);
  const auto base = fit_mm(f);

  const double k = 4.0;
  const FieldSample scaled(lat, f.values() * k);
  const auto ps = fit_mm(scaled);
  CHECK(ps.lambda() == base.lambda());
  CHECK(ps.c() == base.c());
  CHECK(ps.mu() == base.mu() * k);
  CHECK(ps.sigma2() == base.sigma2() * k * k);
  CHECK(rel(ps.mu_seed(), base.mu_seed() * k) < 1e-14);
  CHECK(rel(ps.tau2(), base.tau2() * k * k) < 1e-14);

  const double a = 3.25;
  const FieldSample shifted(lat, f.values().array() + a);
  const auto pt = fit_mm(shifted);
  CHECK(rel(pt.lambda(), base.lambda()) < 1e-9);
  CHECK(rel(pt.c(), base.c()) < 1e-9);
  CHECK(rel(pt.tau2(), base.tau2()) < 1e-9);
  CHECK(pt.mu() == doctest::Approx(base.mu() + a).epsilon(1e-12));
  const double mu_seed_shift = base.lambda() * base.c_tilde() * a / 2.0;
  CHECK(pt.mu_seed() == doctest::Approx(base.mu_seed() + mu_seed_shift).epsilon(1e-9));
}

TEST_CASE("max_lag is clamped to the lattice") {
  const Lattice lat(3, 40, 0.05, 0.05);
  const ExactSimulator sim(StouParams::from_natural(1.0, 1.0, 0.2, 0.01), lat);
  Rng rng = make_stream(11);
  const FieldSample f = sim.simulate(rng);
  const auto a = fit_mm(f, 5);
  const auto b = fit_mm_from_moments(empirical_acf(f, Axis::Temporal, 5), empirical_acf(f, Axis::Spatial, 2), 0.05,
                                     0.05, sample_moments(f));
  CHECK(a.lambda() == b.lambda());
  CHECK(a.c_tilde() == b.c_tilde());
  CHECK_THROWS_AS(fit_mm(FieldSample(Lattice(1, 5, 0.1, 0.1), FieldMatrix::Random(5, 1))), Error);
}

TEST_CASE("averaged lag-1 temporal acf on exact simulations") {
  // Long temporal extent keeps the mean-estimation bias small.
  const Lattice lat(2, 800, 0.05, 0.05);
  const ExactSimulator sim(StouParams::from_natural(1.0, 1.0, 0.2, 0.01), lat);
  double sum = 0.0;
  const int reps = 500;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_stream(derive_seed(77, r, 0));
    sum += empirical_acf(sim.simulate(rng), Axis::Temporal, 1).values[0];
  }
  CHECK(std::abs(sum / reps - std::exp(-0.05)) < 0.01);
}

TEST_CASE("median lambda estimate at lambda = 4 on 101 x 101") {
  const Lattice lat(101, 101, 0.05, 0.05);
  const ExactSimulator sim(StouParams::from_natural(4.0, 1.0, 0.2, 0.01), lat);
  std::vector<double> est;
  for (int d = 0; d < 100; ++d) {
    Rng rng = make_stream(derive_seed(4, d, 0));
    est.push_back(fit_mm(sim.simulate(rng)).lambda());
  }
  std::nth_element(est.begin(), est.begin() + 50, est.end());
  const double hi = est[50];
  const double lo = *std::max_element(est.begin(), est.begin() + 50);
  const double median = 0.5 * (lo + hi);
  MESSAGE("median lambda = " << median);
  CHECK(std::abs(median - 4.0) < 0.4);
}
