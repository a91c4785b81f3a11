// Damped Newton iteration with finite-difference Jacobian, for the small
// square systems the arrangement solvers produce.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <sstream>

#include "logsync/errors.hpp"

namespace logsync {

struct NewtonOptions {
  int max_iterations = 40;
  double tolerance = 1e-12;   // on the residual infinity norm
  double fd_step = 1e-7;      // absolute finite-difference step
  double min_damping = 1.0 / 1024.0;
};

inline Eigen::VectorXd newton_solve(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
    Eigen::VectorXd x, const NewtonOptions& opts, const char* who) {
  const auto norm = [](const Eigen::VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); };
  Eigen::VectorXd r = residual(x);
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (norm(r) <= opts.tolerance) return x;
    const auto n = static_cast<int>(x.size());
    Eigen::MatrixXd J(r.size(), n);
    for (int c = 0; c < n; ++c) {
      Eigen::VectorXd xp = x;
      xp(c) += opts.fd_step;
      J.col(c) = (residual(xp) - r) / opts.fd_step;
    }
    const Eigen::VectorXd step = J.fullPivLu().solve(r);
    if (!step.allFinite()) break;
    double damping = 1.0;
    while (true) {
      const Eigen::VectorXd xc = x - damping * step;
      const Eigen::VectorXd rc = residual(xc);
      if (norm(rc) < norm(r) || damping <= opts.min_damping) {
        x = xc;
        r = rc;
        break;
      }
      damping *= 0.5;
    }
  }
  if (norm(r) <= opts.tolerance) return x;
  std::ostringstream msg;
  msg << who << ": Newton iteration did not converge, residual " << norm(r)
      << " after " << opts.max_iterations << " iterations (tolerance "
      << opts.tolerance << ")";
  throw numerical_error(msg.str());
}

}  // namespace logsync
