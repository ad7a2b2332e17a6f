#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Dense>

#include "stou/estimate_cl.hpp"
#include "stou/model.hpp"

namespace oracle {

inline double bivariate_normal_logpdf(double yi, double yj, double mu, double sigma2, double rho) {
  Eigen::Matrix2d cov;
  cov << sigma2, rho * sigma2, rho * sigma2, sigma2;
  const Eigen::Vector2d z(yi - mu, yj - mu);
  return -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(cov.determinant()) - 0.5 * z.dot(cov.inverse() * z);
}

inline double normal_logpdf(double y, double mu, double sigma2) {
  return -0.5 * std::log(2.0 * std::numbers::pi * sigma2) - 0.5 * (y - mu) * (y - mu) / sigma2;
}

// Pair log-likelihood with rho tied to theta through the separable
// correlation at fixed lags; used to differentiate in all four coordinates.
inline double l_pair_at_lags(const Eigen::Vector4d& th, double yi, double yj, double lag_t, double lag_x) {
  const double rho = std::exp(-th[0] * lag_t - th[1] * lag_x);
  return stou::l_pair(stou::ThetaCL::from_vector(th), yi, yj, rho);
}

// Finite-difference scale per coordinate of (lambda, c_tilde, sigma2, mu):
// the magnitude for the positive ones, the standard deviation for mu.
inline Eigen::Vector4d fd_scale(const Eigen::Vector4d& x) {
  return {std::abs(x[0]), std::abs(x[1]), std::abs(x[2]), std::sqrt(std::abs(x[2]))};
}

// Fourth-order central difference with step h * scale.
inline Eigen::Vector4d fd_gradient(const std::function<double(const Eigen::Vector4d&)>& f, const Eigen::Vector4d& x,
                                   double h = 1e-3) {
  Eigen::Vector4d g;
  const Eigen::Vector4d scale = fd_scale(x);
  for (int k = 0; k < 4; ++k) {
    const double s = h * scale[k];
    auto at = [&](double d) {
      Eigen::Vector4d v = x;
      v[k] += d;
      return f(v);
    };
    g[k] = (at(-2.0 * s) - 8.0 * at(-s) + 8.0 * at(s) - at(2.0 * s)) / (12.0 * s);
  }
  return g;
}

// Central second differences with step h * scale.
inline Eigen::Matrix4d fd_hessian(const std::function<double(const Eigen::Vector4d&)>& f, const Eigen::Vector4d& x,
                                  double h = 1e-4) {
  Eigen::Matrix4d out;
  const Eigen::Vector4d s = h * fd_scale(x);
  const double f0 = f(x);
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d p = x, m = x;
    p[i] += s[i];
    m[i] -= s[i];
    out(i, i) = (f(p) - 2.0 * f0 + f(m)) / (s[i] * s[i]);
    for (int j = i + 1; j < 4; ++j) {
      Eigen::Vector4d pp = x, pm = x, mp = x, mm = x;
      pp[i] += s[i], pp[j] += s[j];
      pm[i] += s[i], pm[j] -= s[j];
      mp[i] -= s[i], mp[j] += s[j];
      mm[i] -= s[i], mm[j] -= s[j];
      out(i, j) = out(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * s[i] * s[j]);
    }
  }
  return out;
}

// Sum of l_pair over every unordered pair of lattice points, keeping those
// that differ along exactly one axis by at most `cutoff` steps, with the
// canonical correlation.
inline double brute_force_pl(const stou::ThetaCL& theta, const stou::FieldSample& field, int cutoff) {
  const stou::Lattice& lat = field.lattice();
  const auto params = theta.to_params();
  const int n = static_cast<int>(lat.size());
  double total = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const int ta = a / lat.nx(), xa = a % lat.nx();
      const int tb = b / lat.nx(), xb = b % lat.nx();
      const int dt = std::abs(ta - tb), dx = std::abs(xa - xb);
      const bool temporal = dx == 0 && dt >= 1 && dt <= cutoff;
      const bool spatial = dt == 0 && dx >= 1 && dx <= cutoff;
      if (!temporal && !spatial) continue;
      const double rho = stou::corr_canonical(params, dt * lat.dt(), dx * lat.dx());
      total += stou::l_pair(theta, field.at(ta, xa), field.at(tb, xb), rho);
    }
  }
  return total;
}

// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace oracle
