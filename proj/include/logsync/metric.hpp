// Static weak-field metric models: flat space and the first-order tidal
// (Fermi normal) form around a radial geodesic.
//
// FermiNormalStatic components, with the x axis along the radial direction
// and mu the curvature parameter:
//
//   -g00   = 1 + E_ij x^i x^j          E = diag(-2 mu, +mu, +mu)
//   g_0i   = 0                         (no frame rotation, purely electric)
//   g_ij   = delta_ij - S_ij / 3       S_ij = R_ikjl x^k x^l
//
// with the vacuum completion of the spatial curvature
//
//   R_(ik)(jl) = d_ij E_kl + d_kl E_ij - d_il E_kj - d_kj E_il
//
// so that R_xyxy = R_xzxz = -mu and R_yzyz = +2 mu.  In closed form
//
//   S(p) = |p|^2 E + (p.E.p) I - (Ep) p^T - p (Ep)^T.
//
// All components are time independent; the model is valid only while
// mu * |x|^2 stays well below one, enforced by a checked bound.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>

#include "logsync/constants.hpp"
#include "logsync/errors.hpp"

namespace logsync {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class MetricKind { Flat, FermiNormalStatic };

inline const char* to_string(MetricKind k) {
  return k == MetricKind::Flat ? "flat" : "fermi_normal_static";
}

// mu := G M / (c^2 r^3)
inline double mu_from(double mass, double radial_coordinate, const PhysicalConstants& k) {
  if (!(radial_coordinate > 0.0))
    throw domain_error("mu_from: radial coordinate must be positive");
  if (!(mass >= 0.0)) throw domain_error("mu_from: mass must be non-negative");
  const double r3 = radial_coordinate * radial_coordinate * radial_coordinate;
  return k.G * mass / (k.c * k.c * r3);
}

class Metric {
public:
  // Gently-curved chart guard: points with mu*|x|^2 at or beyond this are
  // rejected as outside the model's validity domain.
  static constexpr double kValidityBound = 1e-3;

  static Metric flat(const PhysicalConstants& k = PhysicalConstants::si()) {
    k.validate();
    return Metric(MetricKind::Flat, 0.0, k);
  }

  static Metric fermi_normal_static(double mu,
                                    const PhysicalConstants& k = PhysicalConstants::si()) {
    k.validate();
    if (!(mu >= 0.0)) throw validation_error("metric: mu must be non-negative");
    return Metric(MetricKind::FermiNormalStatic, mu, k);
  }

  MetricKind kind() const { return kind_; }
  double mu() const { return mu_; }
  const PhysicalConstants& constants() const { return k_; }
  bool is_flat() const { return kind_ == MetricKind::Flat || mu_ == 0.0; }

  // Same model with curvature switched off; used for flat-limit checks.
  Metric flat_limit() const { return Metric(MetricKind::Flat, 0.0, k_); }

  bool in_validity_domain(const Vec3& p) const {
    if (!p.allFinite()) return false;
    return mu_ * p.squaredNorm() < kValidityBound;
  }

  void require_valid(const Vec3& p, const char* who) const {
    if (!p.allFinite()) throw domain_error(std::string(who) + ": non-finite position");
    if (!in_validity_domain(p))
      throw domain_error(std::string(who) +
                         ": position outside metric validity domain (mu*|x|^2 >= " +
                         std::to_string(kValidityBound) + ")");
  }

  // Tidal matrix E applied to p.
  Vec3 tidal(const Vec3& p) const {
    return Vec3(-2.0 * mu_ * p.x(), mu_ * p.y(), mu_ * p.z());
  }

  // -g00 with c^2 factored out; exactly 1 in flat space.
  double lapse2(const Vec3& p) const {
    if (is_flat()) return 1.0;
    return 1.0 + p.dot(tidal(p));
  }

  Vec3 grad_lapse2(const Vec3& p) const {
    if (is_flat()) return Vec3::Zero();
    return 2.0 * tidal(p);
  }

  Mat3 spatial(const Vec3& p) const {
    if (is_flat()) return Mat3::Identity();
    return Mat3::Identity() - tidal_spatial(p) / 3.0;
  }

  // d g_ij / d x^m for m = 0, 1, 2.
  std::array<Mat3, 3> spatial_derivative(const Vec3& p) const {
    std::array<Mat3, 3> d;
    if (is_flat()) {
      d.fill(Mat3::Zero());
      return d;
    }
    const Mat3 E = tidal_matrix();
    const Vec3 Ep = tidal(p);
    for (int m = 0; m < 3; ++m) {
      const Vec3 em = Vec3::Unit(m);
      const Vec3 Eem = E.col(m);
      Mat3 dS = 2.0 * p(m) * E + 2.0 * Ep(m) * Mat3::Identity();
      dS -= Eem * p.transpose() + Ep * em.transpose();
      dS -= em * Ep.transpose() + p * Eem.transpose();
      d[m] = -dS / 3.0;
    }
    return d;
  }

private:
  Metric(MetricKind kind, double mu, const PhysicalConstants& k)
      : kind_(kind), mu_(mu), k_(k) {}

  Mat3 tidal_matrix() const {
    Mat3 E = Mat3::Zero();
    E(0, 0) = -2.0 * mu_;
    E(1, 1) = mu_;
    E(2, 2) = mu_;
    return E;
  }

  // S_ij = R_ikjl x^k x^l in closed form.
  Mat3 tidal_spatial(const Vec3& p) const {
    const Mat3 E = tidal_matrix();
    const Vec3 Ep = tidal(p);
    return p.squaredNorm() * E + p.dot(Ep) * Mat3::Identity() -
           Ep * p.transpose() - p * Ep.transpose();
  }

  MetricKind kind_;
  double mu_;
  PhysicalConstants k_;
};

// d tau / d t for an observer at fixed spatial position; 1 exactly in flat space.
inline double proper_rate(const Metric& g, const Vec3& p) {
  g.require_valid(p, "proper_rate");
  return std::sqrt(g.lapse2(p));
}

}  // namespace logsync
