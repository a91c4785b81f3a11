// Coordinate light time between fixed spatial points of a static metric.
//
// With zero shift the future null path from a to b projects onto a geodesic
// of the optical 3-metric ghat_ij = g_ij / (-g00/c^2), and the coordinate
// flight time is the ghat-length of that geodesic divided by c (Fermat).
// The solver shoots on the initial velocity of the affinely parametrized
// geodesic x(0) = a, x(1) = b: fixed-step 4th-order integration of
//
//   x'' = -Gamma_hat(x)(x', x'),   l' = sqrt(ghat(x)(x', x'))
//
// with a straight-line initial guess and damped Newton on the endpoint
// mismatch.  Staticity makes the result independent of emission time and
// symmetric under swapping the endpoints.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "logsync/metric.hpp"

namespace logsync {

struct NullPathOptions {
  int steps = 64;                  // RK4 steps over the unit affine interval
  int max_newton_iterations = 12;
  double relative_tolerance = 1e-10;  // on the endpoint miss, per unit separation
};

struct NullPathSolution {
  double delay = 0.0;      // coordinate time of flight [s]
  Vec3 initial_velocity;   // dx/dsigma at the start point
  int iterations = 0;
  double endpoint_miss = 0.0;  // |x(1) - b| / |b - a|
};

namespace detail {

inline Mat3 optical_metric(const Metric& g, const Vec3& p) {
  return g.spatial(p) / g.lapse2(p);
}

inline std::array<Mat3, 3> optical_metric_derivative(const Metric& g, const Vec3& p) {
  const double a = g.lapse2(p);
  const Vec3 da = g.grad_lapse2(p);
  const Mat3 sp = g.spatial(p);
  const auto dsp = g.spatial_derivative(p);
  std::array<Mat3, 3> d;
  for (int m = 0; m < 3; ++m) d[m] = (dsp[m] * a - sp * da(m)) / (a * a);
  return d;
}

// -Gamma^k_ij v^i v^j for the optical metric.
inline Vec3 geodesic_acceleration(const Metric& g, const Vec3& x, const Vec3& v) {
  if (g.is_flat()) return Vec3::Zero();
  const Mat3 gh = optical_metric(g, x);
  const auto dgh = optical_metric_derivative(g, x);
  // Gamma_{l,ij} v^i v^j = (d_i gh_lj + d_j gh_il - d_l gh_ij) v^i v^j / 2.
  // The first two terms coincide after symmetrization.
  Vec3 w;
  for (int l = 0; l < 3; ++l) {
    double first = 0.0;
    for (int i = 0; i < 3; ++i) first += v(i) * (dgh[i].row(l).dot(v));
    const double second = v.dot(dgh[l] * v);
    w(l) = first - 0.5 * second;
  }
  return -gh.ldlt().solve(w);
}

struct PathEndpoint {
  Vec3 x;
  double length;  // accumulated optical length
};

inline PathEndpoint integrate_geodesic(const Metric& g, const Vec3& a, const Vec3& v0,
                                       int steps) {
  const double h = 1.0 / steps;
  Vec3 x = a, v = v0;
  double len = 0.0;
  const auto speed = [&g](const Vec3& xx, const Vec3& vv) {
    return std::sqrt(vv.dot(optical_metric(g, xx) * vv));
  };
  for (int s = 0; s < steps; ++s) {
    const Vec3 k1x = v;
    const Vec3 k1v = geodesic_acceleration(g, x, v);
    const double k1l = speed(x, v);

    const Vec3 k2x = v + 0.5 * h * k1v;
    const Vec3 k2v = geodesic_acceleration(g, x + 0.5 * h * k1x, k2x);
    const double k2l = speed(x + 0.5 * h * k1x, k2x);

    const Vec3 k3x = v + 0.5 * h * k2v;
    const Vec3 k3v = geodesic_acceleration(g, x + 0.5 * h * k2x, k3x);
    const double k3l = speed(x + 0.5 * h * k2x, k3x);

    const Vec3 k4x = v + h * k3v;
    const Vec3 k4v = geodesic_acceleration(g, x + h * k3x, k4x);
    const double k4l = speed(x + h * k3x, k4x);

    x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    len += h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l);
  }
  return {x, len};
}

}  // namespace detail

inline NullPathSolution solve_null_path(const Metric& g, const Vec3& a, const Vec3& b,
                                        const NullPathOptions& opts = {}) {
  g.require_valid(a, "coordinate_light_delay");
  g.require_valid(b, "coordinate_light_delay");
  const double sep = (b - a).norm();
  if (!(sep > 0.0))
    throw domain_error("coordinate_light_delay: endpoints coincide");

  NullPathSolution sol;
  if (g.is_flat()) {
    sol.delay = sep / g.constants().c;
    sol.initial_velocity = b - a;
    return sol;
  }

  Vec3 v = b - a;  // straight-line guess
  detail::PathEndpoint end{};
  double miss = 0.0;
  for (int it = 0; it < opts.max_newton_iterations; ++it) {
    end = detail::integrate_geodesic(g, a, v, opts.steps);
    const Vec3 r = end.x - b;
    miss = r.norm() / sep;
    sol.iterations = it;
    if (miss <= opts.relative_tolerance) {
      sol.delay = end.length / g.constants().c;
      sol.initial_velocity = v;
      sol.endpoint_miss = miss;
      return sol;
    }
    // Forward-difference Jacobian of the endpoint w.r.t. the initial velocity.
    Mat3 J;
    const double dv = 1e-6 * sep;
    for (int c = 0; c < 3; ++c) {
      Vec3 vp = v;
      vp(c) += dv;
      J.col(c) = (detail::integrate_geodesic(g, a, vp, opts.steps).x - end.x) / dv;
    }
    const Vec3 step = J.fullPivLu().solve(r);
    if (!step.allFinite()) break;
    v -= step;
  }

  std::ostringstream msg;
  msg << "null-path solver did not converge: endpoints (" << a.transpose() << ") -> ("
      << b.transpose() << "), mu=" << g.mu() << ", relative endpoint miss " << miss
      << " after " << opts.max_newton_iterations << " iterations";
  throw numerical_error(msg.str());
}

// Coordinate-time duration of the future null path between fixed points.
inline double coordinate_light_delay(const Metric& g, const Vec3& a, const Vec3& b,
                                     const NullPathOptions& opts = {}) {
  return solve_null_path(g, a, b, opts).delay;
}

// Half the round-trip proper duration at a, times c.
inline double radar_distance(const Metric& g, const Vec3& a, const Vec3& b,
                             const NullPathOptions& opts = {}) {
  const double delay = coordinate_light_delay(g, a, b, opts);
  return g.constants().c * proper_rate(g, a) * delay;
}

}  // namespace logsync
