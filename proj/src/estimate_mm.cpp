#include "stou/estimate_mm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stou/errors.hpp"

namespace stou {

SampleMoments sample_moments(const FieldSample& field) {
  const auto values = field.flat();
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, ss / n};
}

AcfEstimate empirical_acf(const FieldSample& field, Axis axis, int max_lag) {
  const int nt = field.lattice().nt();
  const int nx = field.lattice().nx();
  const int extent = axis == Axis::Temporal ? nt : nx;
  if (max_lag < 1 || max_lag >= extent) {
    throw Error(ErrorKind::InvalidArgument,
                "max_lag " + std::to_string(max_lag) + " must be in [1, " + std::to_string(extent - 1) + "]");
  }
  const SampleMoments moments = sample_moments(field);
  if (!(moments.variance > 0.0)) throw Error(ErrorKind::DegenerateSample, "sample variance is zero");

  const FieldMatrix centered = field.values().array() - moments.mean;
  AcfEstimate acf;
  acf.axis = axis;
  for (int h = 1; h <= max_lag; ++h) {
    double sum = 0.0;
    std::size_t pairs = 0;
    if (axis == Axis::Temporal) {
      for (int t = 0; t + h < nt; ++t) {
        for (int x = 0; x < nx; ++x) sum += centered(t, x) * centered(t + h, x);
      }
      pairs = static_cast<std::size_t>(nt - h) * static_cast<std::size_t>(nx);
    } else {
      for (int t = 0; t < nt; ++t) {
        for (int x = 0; x + h < nx; ++x) sum += centered(t, x) * centered(t, x + h);
      }
      pairs = static_cast<std::size_t>(nx - h) * static_cast<std::size_t>(nt);
    }
    acf.lags.push_back(h);
    acf.values.push_back(std::clamp(sum / (static_cast<double>(pairs) * moments.variance), -1.0, 1.0));
  }
  return acf;
}

namespace {

// Slope of -log(acf) on h * step through the origin, over lags in (0, 1).
double decay_rate(const AcfEstimate& acf, double step, const char* axis_name) {
  double sxy = 0.0;
  double sxx = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < acf.lags.size(); ++i) {
    const double r = acf.values[i];
    if (!(r > 0.0 && r < 1.0)) continue;
    const double x = acf.lags[i] * step;
    sxy += x * -std::log(r);
    sxx += x * x;
    ++used;
  }
  if (used == 0) {
    throw Error(ErrorKind::InsufficientUsableLags, std::string("no lag with acf in (0, 1) on the ") + axis_name +
                                                       " axis");
  }
  return sxy / sxx;
}

}  // namespace

StouParams fit_mm_from_moments(const AcfEstimate& temporal, const AcfEstimate& spatial, double dt, double dx,
                               const SampleMoments& moments) {
  if (!(moments.variance > 0.0)) throw Error(ErrorKind::DegenerateSample, "sample variance is zero");
  const double lambda = decay_rate(temporal, dt, "temporal");
  const double c_tilde = decay_rate(spatial, dx, "spatial");
  return StouParams::from_derived(lambda, c_tilde, moments.variance, moments.mean);
}

StouParams fit_mm(const FieldSample& field, int max_lag) {
  const Lattice& lattice = field.lattice();
  if (lattice.nt() < 2 || lattice.nx() < 2) {
    throw Error(ErrorKind::InvalidArgument, "moments matching needs at least 2 points on each axis");
  }
  if (max_lag < 1) throw Error(ErrorKind::InvalidArgument, "max_lag must be >= 1");
  const AcfEstimate temporal = empirical_acf(field, Axis::Temporal, std::min(max_lag, lattice.nt() - 1));
  const AcfEstimate spatial = empirical_acf(field, Axis::Spatial, std::min(max_lag, lattice.nx() - 1));
  return fit_mm_from_moments(temporal, spatial, lattice.dt(), lattice.dx(), sample_moments(field));
}

}  // namespace stou
