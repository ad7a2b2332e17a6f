#include "stou/sim_cholesky.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>

#include "stou/errors.hpp"

namespace stou {

Eigen::MatrixXd CholeskyFactor::reconstruct() const {
  Eigen::MatrixXd out = lower.triangularView<Eigen::Lower>();
  return out * out.transpose();
}

CovarianceMatrix build_covariance(const StouParams& params, const Lattice& lattice, CorrKind kind,
                                  std::size_t max_points) {
  const std::size_t n = lattice.size();
  if (n > max_points) {
    throw Error(ErrorKind::BudgetExceeded, "lattice has " + std::to_string(n) + " points, budget is " +
                                               std::to_string(max_points));
  }

  const int nx = lattice.nx();
  const int nt = lattice.nt();
  // Correlation depends only on |lag| in grid steps; tabulate it once.
  Eigen::MatrixXd table(nt, nx);
  for (int ht = 0; ht < nt; ++ht) {
    for (int hx = 0; hx < nx; ++hx) {
      table(ht, hx) = params.sigma2() * correlation(kind, params, ht * lattice.dt(), hx * lattice.dx());
    }
  }

  CovarianceMatrix cov;
  cov.variance = params.sigma2();
  cov.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (int t1 = 0; t1 < nt; ++t1) {
    for (int x1 = 0; x1 < nx; ++x1) {
      const auto k1 = static_cast<Eigen::Index>(lattice.index(t1, x1));
      for (int t2 = 0; t2 < nt; ++t2) {
        const int ht = std::abs(t1 - t2);
        for (int x2 = 0; x2 < nx; ++x2) {
          cov.entries(static_cast<Eigen::Index>(lattice.index(t2, x2)), k1) = table(ht, std::abs(x1 - x2));
        }
      }
    }
  }
  return cov;
}

namespace {

// Restores the lower triangle from the untouched strict upper triangle and
// the saved diagonal after a failed in-place factorization.
void restore_lower(Eigen::MatrixXd& m, const Eigen::VectorXd& diagonal) {
  m.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();
  m.diagonal() = diagonal;
}

}  // namespace

CholeskyFactor cholesky_factor(CovarianceMatrix sigma) {
  Eigen::MatrixXd& m = sigma.entries;
  if (m.rows() != m.cols()) throw Error(ErrorKind::DimensionMismatch, "covariance matrix is not square");
  const Eigen::VectorXd diagonal = m.diagonal();

  bool ok = false;
  {
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(m);
    ok = llt.info() == Eigen::Success;
  }
  if (!ok) {
    const double jitter = 1e-12 * sigma.variance;
    warn("covariance not numerically positive definite; retrying with diagonal jitter " + std::to_string(jitter));
    restore_lower(m, diagonal);
    m.diagonal().array() += jitter;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(m);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::NotPositiveDefinite, "Cholesky factorization failed after jitter fallback");
    }
  }
  m.triangularView<Eigen::StrictlyUpper>().setZero();
  return CholeskyFactor{std::move(m)};
}

FieldSample simulate_exact(const CholeskyFactor& factor, double mu, const Lattice& lattice, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(lattice.size());
  if (factor.dim() != n) {
    throw Error(ErrorKind::DimensionMismatch, "factor dimension " + std::to_string(factor.dim()) +
                                                  " does not match lattice size " + std::to_string(n));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd eps(n);
  for (Eigen::Index k = 0; k < n; ++k) eps[k] = normal(rng);

  Eigen::VectorXd y = factor.lower.triangularView<Eigen::Lower>() * eps;
  y.array() += mu;
  FieldMatrix values = Eigen::Map<const FieldMatrix>(y.data(), lattice.nt(), lattice.nx());
  return FieldSample(lattice, std::move(values));
}

ExactSimulator::ExactSimulator(const StouParams& params, const Lattice& lattice, std::size_t max_points)
    : lattice_(lattice),
      mu_(params.mu()),
      factor_(cholesky_factor(build_covariance(params, lattice, CorrKind::Canonical, max_points))) {}

FieldSample ExactSimulator::simulate(Rng& rng) const { return simulate_exact(factor_, mu_, lattice_, rng); }

}  // namespace stou
