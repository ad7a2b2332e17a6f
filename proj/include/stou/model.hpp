#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

namespace stou {

/// Parameters of the Gaussian canonical STOU field.
///
/// Stored as (lambda, c_tilde, sigma2, mu), the vector the composite
/// likelihood estimator works with. The Levy-seed view (c, mu_seed, tau2)
/// is derived on demand through
///
///   c_tilde = lambda / c,   sigma2 = c tau2 / (2 lambda^2),   mu = 2 c mu_seed / lambda^2.
class StouParams {
 public:
  /// From the seed parameterization. Throws InvalidArgument unless
  /// lambda, c, tau2 > 0 and mu_seed is finite.
  static StouParams from_natural(double lambda, double c, double mu_seed, double tau2);
  /// From the field parameterization. Throws InvalidArgument unless
  /// lambda, c_tilde, sigma2 > 0 and mu is finite.
  static StouParams from_derived(double lambda, double c_tilde, double sigma2, double mu);

  double lambda() const noexcept { return lambda_; }
  double c_tilde() const noexcept { return c_tilde_; }
  double sigma2() const noexcept { return sigma2_; }
  double mu() const noexcept { return mu_; }

  double c() const noexcept { return lambda_ / c_tilde_; }
  double mu_seed() const noexcept { return lambda_ * c_tilde_ * mu_ / 2.0; }
  double tau2() const noexcept { return 2.0 * lambda_ * c_tilde_ * sigma2_; }
  double tau() const noexcept;

 private:
  StouParams(double lambda, double c_tilde, double sigma2, double mu);

  double lambda_;
  double c_tilde_;
  double sigma2_;
  double mu_;
};

struct FieldMoments {
  double mu;
  double sigma2;
};

/// Stationary mean and variance of the field.
FieldMoments derived_moments(const StouParams& params) noexcept;

/// Regular space-time grid. Points are indexed time-major:
/// k = t_index * nx + x_index.
class Lattice {
 public:
  Lattice(int nx, int nt, double dx, double dt);

  int nx() const noexcept { return nx_; }
  int nt() const noexcept { return nt_; }
  double dx() const noexcept { return dx_; }
  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(nt_); }
  std::size_t index(int t_index, int x_index) const noexcept {
    return static_cast<std::size_t>(t_index) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(x_index);
  }

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  int nx_;
  int nt_;
  double dx_;
  double dt_;
};

/// Row t, column x; row-major so the flat storage follows Lattice::index.
using FieldMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One realization on a lattice. Shape nt x nx, all entries finite.
class FieldSample {
 public:
  FieldSample(Lattice lattice, FieldMatrix values);

  const Lattice& lattice() const noexcept { return lattice_; }
  const FieldMatrix& values() const noexcept { return values_; }
  double at(int t_index, int x_index) const { return values_(t_index, x_index); }
  std::span<const double> flat() const noexcept { return {values_.data(), static_cast<std::size_t>(values_.size())}; }

 private:
  Lattice lattice_;
  FieldMatrix values_;
};

enum class CorrKind { Canonical, Separable };

/// exp(-lambda * max(|lag_t|, |lag_x| / c))
double corr_canonical(const StouParams& params, double lag_t, double lag_x) noexcept;
double corr_canonical(double lambda, double c, double lag_t, double lag_x) noexcept;

/// exp(-lambda |lag_t| - c_tilde |lag_x|). Agrees with the canonical form
/// whenever one of the lags is zero.
double corr_separable(const StouParams& params, double lag_t, double lag_x) noexcept;
double corr_separable(double lambda, double c_tilde, double lag_t, double lag_x) noexcept;

double correlation(CorrKind kind, const StouParams& params, double lag_t, double lag_x) noexcept;

}  // namespace stou
