#ifndef HMPC_NELDER_MEAD_HPP
#define HMPC_NELDER_MEAD_HPP

#include <Eigen/Dense>
#include <functional>

namespace hmpc {

struct NelderMeadOptions {
  int max_iters = 200;
  double f_tol = 1e-12;   // stop when the simplex function spread drops below
  double x_tol = 1e-12;   // ... or its diameter does
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
};

/// Derivative-free simplex descent (reflection 1, expansion 2, contraction
/// 1/2, shrink 1/2). The initial simplex is x0 plus steps[i] along each
/// coordinate. Fully deterministic.
NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
    const NelderMeadOptions& opts = {});

}  // namespace hmpc

#endif  // HMPC_NELDER_MEAD_HPP
