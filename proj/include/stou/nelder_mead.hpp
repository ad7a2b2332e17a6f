#pragma once

#include <functional>

#include <Eigen/Core>

namespace stou {

struct NelderMeadOptions {
  double ftol_rel = 1e-8;   // stop when 2|f_worst - f_best| <= ftol_rel (|f_worst| + |f_best|)
  int max_iterations = 2000;
  int restarts = 1;         // fresh simplexes built around the incumbent after the first run
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;       // summed over all runs
  bool converged = false;   // the final run met the tolerance
};

/// Minimizes f from x0 with an initial simplex x0 + step_i e_i. f may return
/// +inf to reject a point. Standard coefficients (1, 2, 1/2, 1/2). The
/// returned value never exceeds f(x0).
NelderMeadResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                                      const NelderMeadOptions& options = {});

}  // namespace stou
