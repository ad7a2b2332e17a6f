#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "stou/model.hpp"
#include "stou/random.hpp"

namespace stou {

/// Largest lattice (in points) the dense route accepts by default: a 101 x 101
/// grid, i.e. an ~830 MB covariance matrix.
inline constexpr std::size_t kDefaultMaxPoints = 101 * 101;

/// Dense covariance of the field over all lattice points, time-major layout.
struct CovarianceMatrix {
  Eigen::MatrixXd entries;
  double variance = 0.0;  // common diagonal value

  Eigen::Index dim() const noexcept { return entries.rows(); }
};

/// Lower-triangular M with M M^T = Sigma.
struct CholeskyFactor {
  Eigen::MatrixXd lower;

  Eigen::Index dim() const noexcept { return lower.rows(); }
  Eigen::MatrixXd reconstruct() const;
};

/// Entry (k, k') = sigma2 * corr(kind; lag between points k and k').
/// Throws BudgetExceeded if the lattice has more than max_points points.
CovarianceMatrix build_covariance(const StouParams& params, const Lattice& lattice, CorrKind kind,
                                  std::size_t max_points = kDefaultMaxPoints);

/// Dense Cholesky, in place. If a non-positive pivot shows up, retries once
/// with diagonal jitter 1e-12 * variance (and warns); throws
/// NotPositiveDefinite if that fails too.
CholeskyFactor cholesky_factor(CovarianceMatrix sigma);

/// mu + M eps, eps drawn i.i.d. N(0, 1) from rng in point-index order.
FieldSample simulate_exact(const CholeskyFactor& factor, double mu, const Lattice& lattice, Rng& rng);

/// Polymorphic simulator so the bootstrap can swap exact and grid schemes.
class FieldSimulator {
 public:
  virtual ~FieldSimulator() = default;
  virtual FieldSample simulate(Rng& rng) const = 0;
  virtual const Lattice& lattice() const noexcept = 0;
};

/// Factorizes once; simulate() is const and safe to call concurrently with
/// independent streams.
class ExactSimulator final : public FieldSimulator {
 public:
  ExactSimulator(const StouParams& params, const Lattice& lattice, std::size_t max_points = kDefaultMaxPoints);

  FieldSample simulate(Rng& rng) const override;
  const Lattice& lattice() const noexcept override { return lattice_; }
  const CholeskyFactor& factor() const noexcept { return factor_; }

 private:
  Lattice lattice_;
  double mu_;
  CholeskyFactor factor_;
};

}  // namespace stou
