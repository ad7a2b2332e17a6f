#include "stou/estimate_cl.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/math/distributions/normal.hpp>

#include "stou/errors.hpp"
#include "stou/estimate_mm.hpp"

namespace stou {

StouParams ThetaCL::to_params() const { return StouParams::from_derived(lambda, c_tilde, sigma2, mu); }

std::string_view theta_name(int index) noexcept {
  switch (index) {
    case ThetaCL::kLambda: return "lambda";
    case ThetaCL::kCTilde: return "c_tilde";
    case ThetaCL::kSigma2: return "sigma2";
    case ThetaCL::kMu: return "mu";
    default: return "?";
  }
}

void PairWeightSpec::validate() const {
  if (cutoff_d < 1) throw Error(ErrorKind::InvalidArgument, "pair cutoff_d must be >= 1");
  if (!axis_aligned_only) throw Error(ErrorKind::InvalidArgument, "only axis-aligned pair weights are supported");
}

void WindowSpec::validate() const {
  if (window_nx < 2 || window_nt < 2) throw Error(ErrorKind::InvalidArgument, "window extents must be >= 2");
  if (step_x < 1 || step_t < 1) throw Error(ErrorKind::InvalidArgument, "window strides must be >= 1");
}

std::vector<WindowOrigin> enumerate_windows(const Lattice& lattice, const WindowSpec& windows) {
  windows.validate();
  std::vector<WindowOrigin> out;
  for (int t0 = 0; t0 + windows.window_nt <= lattice.nt(); t0 += windows.step_t) {
    for (int x0 = 0; x0 + windows.window_nx <= lattice.nx(); x0 += windows.step_x) out.push_back({t0, x0});
  }
  if (out.empty()) throw Error(ErrorKind::NoValidWindows, "no subsampling window fits in the lattice");
  return out;
}

EstimationScenario EstimationScenario::parse(std::string_view free_list, const ThetaCL& fixed_values) {
  EstimationScenario s;
  s.fixed_values = fixed_values;
  std::size_t pos = 0;
  while (pos <= free_list.size()) {
    const std::size_t comma = std::min(free_list.find(',', pos), free_list.size());
    std::string_view token = free_list.substr(pos, comma - pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (!token.empty()) {
      bool found = false;
      for (int k = 0; k < 4; ++k) {
        if (token == theta_name(k)) {
          s.free[static_cast<std::size_t>(k)] = true;
          found = true;
        }
      }
      if (!found) throw Error(ErrorKind::InvalidArgument, "unknown scenario parameter '" + std::string(token) + "'");
    }
    pos = comma + 1;
  }
  s.validate();
  return s;
}

int EstimationScenario::free_count() const noexcept {
  int n = 0;
  for (bool f : free) n += f ? 1 : 0;
  return n;
}

std::vector<int> EstimationScenario::free_indices() const {
  std::vector<int> out;
  for (int k = 0; k < 4; ++k) {
    if (free[static_cast<std::size_t>(k)]) out.push_back(k);
  }
  return out;
}

void EstimationScenario::validate() const {
  if (free_count() == 0) throw Error(ErrorKind::InvalidArgument, "scenario must free at least one parameter");
  fixed_values.to_params();
}

namespace {

constexpr double kUnityMargin = 1e-12;

void check_rho(double rho) {
  if (!(std::abs(rho) < 1.0 - kUnityMargin)) {
    throw Error(ErrorKind::CorrelationAtUnity, "pair correlation " + std::to_string(rho) + " too close to 1");
  }
}

// Correlation and its (lambda, c_tilde) gradient for every admissible pair
// shape. Row 0 holds temporal lags, row 1 spatial; column h - 1 holds lag h.
struct PairTable {
  int cutoff;
  std::array<std::vector<double>, 2> rho;
  std::array<std::vector<Eigen::Vector2d>, 2> grad;

  PairTable(const ThetaCL& theta, const Lattice& lattice, int d) : cutoff(d) {
    for (int axis = 0; axis < 2; ++axis) {
      for (int h = 1; h <= d; ++h) {
        const double lag_t = axis == 0 ? h * lattice.dt() : 0.0;
        const double lag_x = axis == 1 ? h * lattice.dx() : 0.0;
        const double r = corr_separable(theta.lambda, theta.c_tilde, lag_t, lag_x);
        rho[static_cast<std::size_t>(axis)].push_back(r);
        grad[static_cast<std::size_t>(axis)].push_back(Eigen::Vector2d(-lag_t * r, -lag_x * r));
      }
    }
  }
};

// Visits every admissible pair of the box [t0, t0 + nt) x [x0, x0 + nx) in
// a fixed order: by first endpoint (time-major), then lag, temporal first.
template <class F>
void for_each_pair(int t0, int x0, int nt, int nx, int cutoff, F&& visit) {
  for (int t = t0; t < t0 + nt; ++t) {
    for (int x = x0; x < x0 + nx; ++x) {
      for (int h = 1; h <= cutoff; ++h) {
        if (t + h < t0 + nt) visit(t, x, t + h, x, 0, h);
        if (x + h < x0 + nx) visit(t, x, t, x + h, 1, h);
      }
    }
  }
}

}  // namespace

double l_pair(const ThetaCL& theta, double y_i, double y_j, double rho) {
  check_rho(rho);
  const double a = y_i - theta.mu;
  const double b = y_j - theta.mu;
  const double one_minus_rho2 = 1.0 - rho * rho;
  const double big_b = a * a + b * b - 2.0 * rho * a * b;
  return -0.5 * (2.0 * std::log(theta.sigma2) + std::log(one_minus_rho2) + big_b / (theta.sigma2 * one_minus_rho2));
}

Eigen::Vector4d score_U(const ThetaCL& theta, double y_i, double y_j, double rho, const Eigen::Vector2d& grad_rho) {
  check_rho(rho);
  const double s2 = theta.sigma2;
  const double a = y_i - theta.mu;
  const double b = y_j - theta.mu;
  const double one_minus_rho2 = 1.0 - rho * rho;
  const double big_b = a * a + b * b - 2.0 * rho * a * b;
  const double big_f = rho * a * a + rho * b * b - (1.0 + rho * rho) * a * b;
  const double big_q = y_i + y_j;
  const Eigen::Vector2d kappa = grad_rho / (1.0 - rho);

  // kappa rho/(1+rho) (1 - F/(sigma2 rho (1-rho^2))), expanded so rho = 0 is fine.
  const double corr_factor = rho / (1.0 + rho) - big_f / (s2 * (1.0 + rho) * one_minus_rho2);
  Eigen::Vector4d u;
  u.head<2>() = kappa * corr_factor;
  u[2] = -(1.0 / s2) * (1.0 - big_b / (2.0 * s2 * one_minus_rho2));
  // d l / d mu = (a + b) / (sigma2 (1 + rho)) = (Q - 2 mu) / (sigma2 (1 + rho)).
  u[3] = (big_q - 2.0 * theta.mu) / (s2 * (1.0 + rho));
  return u;
}

Eigen::Matrix4d pair_information(const ThetaCL& theta, double rho, const Eigen::Vector2d& grad_rho) {
  check_rho(rho);
  const double s2 = theta.sigma2;
  const Eigen::Vector2d kappa = grad_rho / (1.0 - rho);
  const double alpha = std::sqrt(1.0 + rho * rho) / (1.0 + rho);

  Eigen::Matrix4d block = Eigen::Matrix4d::Zero();
  block.topLeftCorner<2, 2>() = alpha * alpha * kappa * kappa.transpose();
  const Eigen::Vector2d cross = -rho / (s2 * (1.0 + rho)) * kappa;
  block.block<2, 1>(0, 2) = cross;
  block.block<1, 2>(2, 0) = cross.transpose();
  block(2, 2) = 1.0 / (s2 * s2);
  block(3, 3) = 2.0 / (s2 * (1.0 + rho));
  return block;
}

double pairwise_loglik(const ThetaCL& theta, const FieldSample& field, const PairWeightSpec& weights) {
  weights.validate();
  const Lattice& lat = field.lattice();
  const PairTable table(theta, lat, weights.cutoff_d);

  // l = c0 + c1 * B per pair shape.
  std::array<std::vector<double>, 2> c0;
  std::array<std::vector<double>, 2> c1;
  for (std::size_t axis = 0; axis < 2; ++axis) {
    for (double r : table.rho[axis]) {
      check_rho(r);
      const double omr2 = 1.0 - r * r;
      c0[axis].push_back(-0.5 * (2.0 * std::log(theta.sigma2) + std::log(omr2)));
      c1[axis].push_back(-0.5 / (theta.sigma2 * omr2));
    }
  }

  const FieldMatrix& y = field.values();
  const double mu = theta.mu;
  double total = 0.0;
  for_each_pair(0, 0, lat.nt(), lat.nx(), weights.cutoff_d, [&](int t1, int x1, int t2, int x2, int axis, int h) {
    const auto ax = static_cast<std::size_t>(axis);
    const auto k = static_cast<std::size_t>(h - 1);
    const double a = y(t1, x1) - mu;
    const double b = y(t2, x2) - mu;
    const double r = table.rho[ax][k];
    total += c0[ax][k] + c1[ax][k] * (a * a + b * b - 2.0 * r * a * b);
  });
  return total;
}

double total_pair_weight(const Lattice& lattice, const PairWeightSpec& weights) {
  weights.validate();
  double w = 0.0;
  for (int h = 1; h <= weights.cutoff_d; ++h) {
    w += static_cast<double>(std::max(0, lattice.nt() - h)) * lattice.nx();
    w += static_cast<double>(std::max(0, lattice.nx() - h)) * lattice.nt();
  }
  return w;
}

Eigen::Matrix4d hessian_H(const ThetaCL& theta, const Lattice& lattice, const PairWeightSpec& weights) {
  weights.validate();
  const PairTable table(theta, lattice, weights.cutoff_d);
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  for (int lag = 1; lag <= weights.cutoff_d; ++lag) {
    const auto k = static_cast<std::size_t>(lag - 1);
    const double n_temporal = static_cast<double>(std::max(0, lattice.nt() - lag)) * lattice.nx();
    const double n_spatial = static_cast<double>(std::max(0, lattice.nx() - lag)) * lattice.nt();
    if (n_temporal > 0) h += n_temporal * pair_information(theta, table.rho[0][k], table.grad[0][k]);
    if (n_spatial > 0) h += n_spatial * pair_information(theta, table.rho[1][k], table.grad[1][k]);
  }
  return h;
}

Eigen::Matrix4d wsev_J(const ThetaCL& theta_hat, const FieldSample& field, const PairWeightSpec& weights,
                       const WindowSpec& windows) {
  weights.validate();
  const Lattice& lat = field.lattice();
  const std::vector<WindowOrigin> origins = enumerate_windows(lat, windows);
  const PairTable table(theta_hat, lat, weights.cutoff_d);
  const FieldMatrix& y = field.values();

  Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
  int used = 0;
  for (const WindowOrigin& o : origins) {
    Eigen::Vector4d sum = Eigen::Vector4d::Zero();
    double w = 0.0;
    for_each_pair(o.t0, o.x0, windows.window_nt, windows.window_nx, weights.cutoff_d,
                  [&](int t1, int x1, int t2, int x2, int axis, int h) {
                    const auto ax = static_cast<std::size_t>(axis);
                    const auto k = static_cast<std::size_t>(h - 1);
                    sum += score_U(theta_hat, y(t1, x1), y(t2, x2), table.rho[ax][k], table.grad[ax][k]);
                    w += 1.0;
                  });
    if (w == 0.0) continue;
    j += sum * sum.transpose() / w;
    ++used;
  }
  if (used == 0) throw Error(ErrorKind::NoValidWindows, "no subsampling window contains an admissible pair");
  return j / static_cast<double>(used);
}

ClFit maximize_cl(const FieldSample& field, const PairWeightSpec& weights, const EstimationScenario& scenario,
                  const ThetaCL& start, const NelderMeadOptions& options) {
  weights.validate();
  start.to_params();
  const std::vector<int> free = scenario.free_indices();
  const Eigen::Vector4d base = start.vector();

  auto unpack = [&](const Eigen::VectorXd& z) {
    Eigen::Vector4d v = base;
    for (std::size_t i = 0; i < free.size(); ++i) {
      const int k = free[i];
      v[k] = k == ThetaCL::kMu ? z[static_cast<Eigen::Index>(i)] : std::exp(z[static_cast<Eigen::Index>(i)]);
    }
    return ThetaCL::from_vector(v);
  };
  auto objective = [&](const Eigen::VectorXd& z) {
    const ThetaCL theta = unpack(z);
    if (!(theta.lambda > 0.0 && theta.c_tilde > 0.0 && theta.sigma2 > 0.0) || !theta.vector().allFinite()) {
      return std::numeric_limits<double>::infinity();
    }
    try {
      const double v = -pairwise_loglik(theta, field, weights);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const auto n = static_cast<Eigen::Index>(free.size());
  Eigen::VectorXd z0(n);
  Eigen::VectorXd step(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = free[static_cast<std::size_t>(i)];
    if (k == ThetaCL::kMu) {
      z0[i] = base[k];
      step[i] = 0.1 * std::sqrt(base[ThetaCL::kSigma2]);
    } else {
      z0[i] = std::log(base[k]);
      step[i] = 0.1;
    }
  }

  const NelderMeadResult nm = nelder_mead_minimize(objective, z0, step, options);
  ClFit fit;
  fit.theta = unpack(nm.x);
  fit.loglik = -nm.value;
  fit.iterations = nm.iterations;
  fit.converged = nm.converged;
  return fit;
}

namespace {

Eigen::MatrixXd restrict(const Eigen::Matrix4d& m, const std::vector<int>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = m(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace

SandwichResult sandwich(const FieldSample& field, const PairWeightSpec& weights, const WindowSpec& windows,
                        const EstimationScenario& scenario, const ThetaCL& start, const NelderMeadOptions& options) {
  scenario.validate();
  const ClFit fit = maximize_cl(field, weights, scenario, start, options);

  SandwichResult out;
  out.theta_hat = fit.theta;
  out.converged = fit.converged;
  out.loglik = fit.loglik;
  out.free_indices = scenario.free_indices();
  out.W = total_pair_weight(field.lattice(), weights);
  out.H = restrict(hessian_H(fit.theta, field.lattice(), weights), out.free_indices);
  out.J_star = restrict(wsev_J(fit.theta, field, weights, windows), out.free_indices);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.H, Eigen::EigenvaluesOnly);
  const double ev_min = eig.eigenvalues().minCoeff();
  const double ev_max = eig.eigenvalues().maxCoeff();
  if (!(ev_min > 0.0) || ev_max / ev_min > 1e12) {
    throw Error(ErrorKind::SingularH, "restricted H is singular or ill-conditioned");
  }
  const Eigen::MatrixXd h_inv = out.H.inverse();
  out.G_inv = out.W * h_inv * out.J_star * h_inv;
  out.G_inv = 0.5 * (out.G_inv + out.G_inv.transpose());
  for (Eigen::Index i = 0; i < out.G_inv.rows(); ++i) out.standard_errors.push_back(std::sqrt(out.G_inv(i, i)));
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "normal quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

std::vector<IntervalEstimate> sandwich_intervals(const SandwichResult& fit, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "level must be in (0, 1)");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const ThetaCL& th = fit.theta_hat;
  const double tau = std::sqrt(2.0 * th.lambda * th.c_tilde * th.sigma2);

  std::array<bool, 4> is_free{};
  for (int k : fit.free_indices) is_free[static_cast<std::size_t>(k)] = true;
  const auto n = static_cast<Eigen::Index>(fit.free_indices.size());

  auto make = [&](Parameter p, double value, const Eigen::Vector4d& grad) -> std::optional<IntervalEstimate> {
    Eigen::VectorXd g(n);
    bool depends = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int k = fit.free_indices[static_cast<std::size_t>(i)];
      g[i] = grad[k];
      depends = depends || grad[k] != 0.0;
    }
    if (!depends) return std::nullopt;
    const double se = std::sqrt(std::max(0.0, g.dot(fit.G_inv * g)));
    return IntervalEstimate{p, value, value - z * se, value + z * se, value, level};
  };

  std::vector<IntervalEstimate> out;
  auto push = [&](std::optional<IntervalEstimate> e) {
    if (e) out.push_back(*e);
  };
  push(make(Parameter::Lambda, th.lambda, Eigen::Vector4d(1, 0, 0, 0)));
  push(make(Parameter::CTilde, th.c_tilde, Eigen::Vector4d(0, 1, 0, 0)));
  push(make(Parameter::C, th.lambda / th.c_tilde,
            Eigen::Vector4d(1.0 / th.c_tilde, -th.lambda / (th.c_tilde * th.c_tilde), 0, 0)));
  push(make(Parameter::MuSeed, th.lambda * th.c_tilde * th.mu / 2.0,
            Eigen::Vector4d(th.c_tilde * th.mu / 2.0, th.lambda * th.mu / 2.0, 0, th.lambda * th.c_tilde / 2.0)));
  push(make(Parameter::Tau, tau,
            Eigen::Vector4d(th.c_tilde * th.sigma2 / tau, th.lambda * th.sigma2 / tau, th.lambda * th.c_tilde / tau, 0)));
  push(make(Parameter::Mu, th.mu, Eigen::Vector4d(0, 0, 0, 1)));
  push(make(Parameter::Sigma2, th.sigma2, Eigen::Vector4d(0, 0, 1, 0)));
  return out;
}

ClCiResult sandwich_ci(const FieldSample& field, const PairWeightSpec& weights, const WindowSpec& windows,
                       const EstimationScenario& scenario, double level, std::optional<ThetaCL> start,
                       const NelderMeadOptions& options) {
  scenario.validate();
  ThetaCL initial = scenario.fixed_values;
  if (start) {
    initial = *start;
  } else {
    const ThetaCL mm = ThetaCL::from_params(fit_mm(field));
    const Eigen::Vector4d mm_v = mm.vector();
    Eigen::Vector4d v = scenario.fixed_values.vector();
    for (int k : scenario.free_indices()) v[k] = mm_v[k];
    initial = ThetaCL::from_vector(v);
  }
  ClCiResult out;
  out.fit = sandwich(field, weights, windows, scenario, initial, options);
  out.intervals = sandwich_intervals(out.fit, level);
  return out;
}

}  // namespace stou
