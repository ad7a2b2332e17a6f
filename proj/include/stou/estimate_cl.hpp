#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "stou/interval.hpp"
#include "stou/model.hpp"
#include "stou/nelder_mead.hpp"

namespace stou {

/// Composite-likelihood parameter vector (lambda, c_tilde, sigma2, mu).
struct ThetaCL {
  enum Index : int { kLambda = 0, kCTilde = 1, kSigma2 = 2, kMu = 3 };

  double lambda = 1.0;
  double c_tilde = 1.0;
  double sigma2 = 1.0;
  double mu = 0.0;

  Eigen::Vector4d vector() const noexcept { return {lambda, c_tilde, sigma2, mu}; }
  static ThetaCL from_vector(const Eigen::Vector4d& v) noexcept { return {v[0], v[1], v[2], v[3]}; }
  static ThetaCL from_params(const StouParams& p) noexcept { return {p.lambda(), p.c_tilde(), p.sigma2(), p.mu()}; }
  /// Throws InvalidArgument unless the first three components are positive.
  StouParams to_params() const;
};

std::string_view theta_name(int index) noexcept;

/// w_ij = 1 for pairs that differ along exactly one axis by at most
/// cutoff_d grid steps, 0 otherwise.
struct PairWeightSpec {
  int cutoff_d = 3;
  bool axis_aligned_only = true;

  void validate() const;
};

/// Sliding subsampling windows, extents and strides in grid points.
struct WindowSpec {
  int window_nx = 11;
  int window_nt = 11;
  int step_x = 5;
  int step_t = 5;

  void validate() const;
};

struct WindowOrigin {
  int t0;
  int x0;
};

/// Window origins in time-major order. Throws NoValidWindows if none fits.
std::vector<WindowOrigin> enumerate_windows(const Lattice& lattice, const WindowSpec& windows);

/// Which coordinates of theta are estimated; the rest are pinned to
/// fixed_values.
struct EstimationScenario {
  std::array<bool, 4> free{};
  ThetaCL fixed_values{};

  /// Comma-separated names from {lambda, c_tilde, sigma2, mu}.
  static EstimationScenario parse(std::string_view free_list, const ThetaCL& fixed_values);
  int free_count() const noexcept;
  std::vector<int> free_indices() const;
  void validate() const;
};

/// Bivariate normal pair log-likelihood without the -log(2 pi) constant:
///   -1/2 [2 log sigma2 + log(1 - rho^2) + B / (sigma2 (1 - rho^2))],
///   B = (y_i - mu)^2 + (y_j - mu)^2 - 2 rho (y_i - mu)(y_j - mu).
/// Throws CorrelationAtUnity when |rho| >= 1 - 1e-12.
double l_pair(const ThetaCL& theta, double y_i, double y_j, double rho);

/// Gradient of l_pair in theta; grad_rho is d rho / d(lambda, c_tilde).
Eigen::Vector4d score_U(const ThetaCL& theta, double y_i, double y_j, double rho, const Eigen::Vector2d& grad_rho);

/// Per-pair expected information -E[Hessian of l_pair].
Eigen::Matrix4d pair_information(const ThetaCL& theta, double rho, const Eigen::Vector2d& grad_rho);

/// Weighted pairwise log-likelihood over the admissible pairs with the
/// separable correlation (identical to the canonical one on axis pairs).
double pairwise_loglik(const ThetaCL& theta, const FieldSample& field, const PairWeightSpec& weights);

/// W: total weight of admissible pairs on the lattice.
double total_pair_weight(const Lattice& lattice, const PairWeightSpec& weights);

/// H(theta): sum of per-pair information blocks. Depends on the lattice only.
Eigen::Matrix4d hessian_H(const ThetaCL& theta, const Lattice& lattice, const PairWeightSpec& weights);

/// Window subsampling estimate of J*:
///   (1/m) sum_k (1/W_k) (sum_{pairs in window k} U)(sum U)^T,
/// a pair belonging to a window when both endpoints lie inside it. Windows
/// without pairs are skipped. Throws NoValidWindows when m = 0.
Eigen::Matrix4d wsev_J(const ThetaCL& theta_hat, const FieldSample& field, const PairWeightSpec& weights,
                       const WindowSpec& windows);

struct ClFit {
  ThetaCL theta;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = true;  // false: iteration budget exhausted, theta is the incumbent
};

/// Nelder-Mead on the free coordinates of the scenario, positive components
/// in log space. Coordinates that are not free keep their values from start.
ClFit maximize_cl(const FieldSample& field, const PairWeightSpec& weights, const EstimationScenario& scenario,
                  const ThetaCL& start, const NelderMeadOptions& options = {});

struct SandwichResult {
  ThetaCL theta_hat;
  std::vector<int> free_indices;
  Eigen::MatrixXd H;       // restricted to free coordinates
  Eigen::MatrixXd J_star;  // restricted to free coordinates
  Eigen::MatrixXd G_inv;   // W H^-1 J* H^-1
  double W = 0.0;
  std::vector<double> standard_errors;  // per free coordinate
  bool converged = true;
  double loglik = 0.0;
};

/// Fits theta by maximize_cl and evaluates the sandwich covariance at the
/// estimate. Throws SingularH if restricted H has condition number > 1e12.
SandwichResult sandwich(const FieldSample& field, const PairWeightSpec& weights, const WindowSpec& windows,
                        const EstimationScenario& scenario, const ThetaCL& start,
                        const NelderMeadOptions& options = {});

/// Normal-theory intervals estimate +- z se for each free coordinate and, by
/// the delta method, for c, tau and mu_seed whenever they depend on a free
/// coordinate. Rows follow kAllParameters order.
std::vector<IntervalEstimate> sandwich_intervals(const SandwichResult& fit, double level);

struct ClCiResult {
  SandwichResult fit;
  std::vector<IntervalEstimate> intervals;
};

/// Full pipeline. Without an explicit start, free coordinates start from the
/// moments-matching fit and fixed ones come from the scenario.
ClCiResult sandwich_ci(const FieldSample& field, const PairWeightSpec& weights, const WindowSpec& windows,
                       const EstimationScenario& scenario, double level,
                       std::optional<ThetaCL> start = std::nullopt, const NelderMeadOptions& options = {});

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace stou
