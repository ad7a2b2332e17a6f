#include "stou/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stou/errors.hpp"

namespace stou {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

StouParams::StouParams(double lambda, double c_tilde, double sigma2, double mu)
    : lambda_(lambda), c_tilde_(c_tilde), sigma2_(sigma2), mu_(mu) {
  require(positive(lambda_), "lambda must be finite and > 0");
  require(positive(c_tilde_), "c_tilde must be finite and > 0");
  require(positive(sigma2_), "sigma2 must be finite and > 0");
  require(std::isfinite(mu_), "mu must be finite");
}

StouParams StouParams::from_natural(double lambda, double c, double mu_seed, double tau2) {
  require(positive(lambda), "lambda must be finite and > 0");
  require(positive(c), "c must be finite and > 0");
  require(positive(tau2), "tau2 must be finite and > 0");
  require(std::isfinite(mu_seed), "mu_seed must be finite");
  const double lambda_sq = lambda * lambda;
  return StouParams(lambda, lambda / c, c * tau2 / (2.0 * lambda_sq), 2.0 * c * mu_seed / lambda_sq);
}

StouParams StouParams::from_derived(double lambda, double c_tilde, double sigma2, double mu) {
  return StouParams(lambda, c_tilde, sigma2, mu);
}

double StouParams::tau() const noexcept { return std::sqrt(tau2()); }

FieldMoments derived_moments(const StouParams& params) noexcept {
  return {params.mu(), params.sigma2()};
}

Lattice::Lattice(int nx, int nt, double dx, double dt) : nx_(nx), nt_(nt), dx_(dx), dt_(dt) {
  require(nx_ >= 1, "lattice nx must be >= 1");
  require(nt_ >= 1, "lattice nt must be >= 1");
  require(positive(dx_), "lattice dx must be finite and > 0");
  require(positive(dt_), "lattice dt must be finite and > 0");
}

FieldSample::FieldSample(Lattice lattice, FieldMatrix values)
    : lattice_(lattice), values_(std::move(values)) {
  if (values_.rows() != lattice_.nt() || values_.cols() != lattice_.nx()) {
    throw Error(ErrorKind::DimensionMismatch,
                "field values are " + std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()) +
                    ", lattice expects " + std::to_string(lattice_.nt()) + "x" + std::to_string(lattice_.nx()));
  }
  if (!values_.allFinite()) throw Error(ErrorKind::InvalidArgument, "field values must be finite");
}

double corr_canonical(double lambda, double c, double lag_t, double lag_x) noexcept {
  return std::exp(-lambda * std::max(std::abs(lag_t), std::abs(lag_x) / c));
}

double corr_canonical(const StouParams& params, double lag_t, double lag_x) noexcept {
  return corr_canonical(params.lambda(), params.c(), lag_t, lag_x);
}

double corr_separable(double lambda, double c_tilde, double lag_t, double lag_x) noexcept {
  return std::exp(-lambda * std::abs(lag_t) - c_tilde * std::abs(lag_x));
}

double corr_separable(const StouParams& params, double lag_t, double lag_x) noexcept {
  return corr_separable(params.lambda(), params.c_tilde(), lag_t, lag_x);
}

double correlation(CorrKind kind, const StouParams& params, double lag_t, double lag_x) noexcept {
  return kind == CorrKind::Canonical ? corr_canonical(params, lag_t, lag_x) : corr_separable(params, lag_t, lag_x);
}

}  // namespace stou
