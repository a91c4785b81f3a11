// Derivative-free simplex minimizer (Nelder-Mead with the standard
// reflect/expand/contract/shrink coefficients).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

namespace logsync {

struct NelderMeadOptions {
  int max_iterations = 4000;
  double f_tolerance = 1e-13;  // spread of simplex values
  double x_tolerance = 1e-12;  // simplex diameter
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
};

inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x0, double initial_step,
                                    const NelderMeadOptions& opts = {}) {
  const auto n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> xs(n + 1, x0);
  for (int i = 0; i < n; ++i) xs[i + 1](i) += initial_step;
  std::vector<double> fs(n + 1);
  for (int i = 0; i <= n; ++i) fs[i] = f(xs[i]);

  std::vector<int> order(n + 1);
  NelderMeadResult res;
  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const int best = order[0], worst = order[n], second = order[n - 1];

    if (fs[worst] - fs[best] < opts.f_tolerance) break;
    double diam = 0.0;
    for (int i = 1; i <= n; ++i)
      diam = std::max(diam, (xs[order[i]] - xs[best]).lpNorm<Eigen::Infinity>());
    if (diam < opts.x_tolerance) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += xs[i];
    centroid /= double(n);

    const Eigen::VectorXd xr = centroid + (centroid - xs[worst]);
    const double fr = f(xr);
    if (fr < fs[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      const Eigen::VectorXd xc = centroid + 0.5 * (xs[worst] - centroid);
      const double fc = f(xc);
      if (fc < fs[worst]) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
          fs[i] = f(xs[i]);
        }
      }
    }
  }

  const auto it = std::min_element(fs.begin(), fs.end());
  res.value = *it;
  res.x = xs[static_cast<std::size_t>(it - fs.begin())];
  return res;
}

}  // namespace logsync
