#pragma once

#include <vector>

#include "stou/model.hpp"

namespace stou {

enum class Axis { Temporal, Spatial };

struct AcfEstimate {
  Axis axis = Axis::Temporal;
  std::vector<int> lags;       // 1, 2, ..., max_lag
  std::vector<double> values;  // empirical autocorrelation at each lag
};

/// Full-sample mean and 1/n variance.
struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
};

SampleMoments sample_moments(const FieldSample& field);

/// Lag-h value: sum over point pairs h steps apart along `axis` of
/// (Y_a - mean)(Y_b - mean), divided by (pair count * variance), with the
/// full-sample mean and 1/n variance. Throws DegenerateSample if the variance
/// is zero and InvalidArgument unless 1 <= max_lag < extent along the axis.
AcfEstimate empirical_acf(const FieldSample& field, Axis axis, int max_lag);

inline constexpr int kDefaultMaxLag = 5;

/// Moments-matching fit. lambda is the no-intercept least-squares slope of
/// -log acf against h dt over lags with acf in (0, 1); c_tilde likewise
/// against h dx; then c = lambda / c_tilde, mu = mean, sigma2 = variance and
/// the seed moments follow by inverting sigma2 = c tau2 / (2 lambda^2),
/// mu = 2 c mu_seed / lambda^2. max_lag is clamped to extent - 1 per axis.
///
/// Throws DegenerateSample, or InsufficientUsableLags when an axis has no lag
/// with acf in (0, 1).
StouParams fit_mm(const FieldSample& field, int max_lag = kDefaultMaxLag);

/// The inversion step alone, from precomputed ACFs and moments.
StouParams fit_mm_from_moments(const AcfEstimate& temporal, const AcfEstimate& spatial, double dt, double dx,
                               const SampleMoments& moments);

}  // namespace stou
