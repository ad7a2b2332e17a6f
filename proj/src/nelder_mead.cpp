#include "stou/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace stou {

namespace {

struct RunResult {
  Eigen::VectorXd x;
  double value;
  int iterations;
  bool converged;
};

RunResult run_simplex(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                      double f0, const Eigen::VectorXd& step, const NelderMeadOptions& opt) {
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  const Eigen::Index n = x0.size();
  std::vector<Eigen::VectorXd> x(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> fx(static_cast<std::size_t>(n + 1), f0);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& v = x[static_cast<std::size_t>(i + 1)];
    v[i] += step[i];
    fx[static_cast<std::size_t>(i + 1)] = f(v);
  }

  std::vector<std::size_t> order(x.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> fs;
    xs.reserve(x.size());
    fs.reserve(x.size());
    for (std::size_t k : order) {
      xs.push_back(std::move(x[k]));
      fs.push_back(fx[k]);
    }
    x = std::move(xs);
    fx = std::move(fs);
  };

  const auto last = static_cast<std::size_t>(n);
  int iter = 0;
  bool converged = false;
  for (; iter < opt.max_iterations; ++iter) {
    sort_simplex();
    const double lo = fx.front();
    const double hi = fx[last];
    if (std::isfinite(hi) && 2.0 * std::abs(hi - lo) <= opt.ftol_rel * (std::abs(hi) + std::abs(lo)) + 1e-300) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < last; ++k) centroid += x[k];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + kReflect * (centroid - x[last]);
    const double fr = f(xr);
    if (fr < fx.front()) {
      const Eigen::VectorXd xe = centroid + kExpand * (xr - centroid);
      const double fe = f(xe);
      if (fe < fr) {
        x[last] = xe;
        fx[last] = fe;
      } else {
        x[last] = xr;
        fx[last] = fr;
      }
    } else if (fr < fx[last - 1]) {
      x[last] = xr;
      fx[last] = fr;
    } else {
      const bool outside = fr < fx[last];
      const Eigen::VectorXd xc =
          outside ? Eigen::VectorXd(centroid + kContract * (xr - centroid))
                  : Eigen::VectorXd(centroid + kContract * (x[last] - centroid));
      const double fc = f(xc);
      if (fc < (outside ? fr : fx[last])) {
        x[last] = xc;
        fx[last] = fc;
      } else {
        for (std::size_t k = 1; k <= last; ++k) {
          x[k] = x[0] + kShrink * (x[k] - x[0]);
          fx[k] = f(x[k]);
        }
      }
    }
  }
  sort_simplex();
  return {x.front(), fx.front(), iter, converged};
}

}  // namespace

NelderMeadResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                                      const NelderMeadOptions& options) {
  NelderMeadResult result;
  result.x = x0;
  result.value = f(x0);
  if (x0.size() == 0) {
    result.converged = true;
    return result;
  }
  for (int run = 0; run <= options.restarts; ++run) {
    RunResult r = run_simplex(f, result.x, result.value, step, options);
    result.iterations += r.iterations;
    result.converged = r.converged;
    if (r.value <= result.value) {
      result.x = std::move(r.x);
      result.value = r.value;
    }
  }
  return result;
}

}  // namespace stou
