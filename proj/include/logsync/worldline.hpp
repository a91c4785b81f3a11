// Worldlines: fixed spatial coordinates in a static chart, or an explicit
// 1+1-dimensional piecewise-linear path for the flat-space constructions.

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "logsync/errors.hpp"
#include "logsync/metric.hpp"

namespace logsync {

class Worldline {
public:
  Worldline() = default;  // at rest at the origin

  static Worldline fixed(const Vec3& position) {
    Worldline w;
    w.static_position_ = position;
    return w;
  }

  // knots (t, x); linear between knots, at rest beyond the ends.
  // Timelike: |dx/dt| < c on every segment.
  static Worldline path_1d(std::vector<std::pair<double, double>> knots, double c) {
    if (knots.size() < 2)
      throw validation_error("worldline path needs at least two knots");
    for (std::size_t i = 1; i < knots.size(); ++i) {
      const double dt = knots[i].first - knots[i - 1].first;
      if (!(dt > 0.0))
        throw validation_error("worldline path: times must be strictly increasing");
      if (!(std::abs(knots[i].second - knots[i - 1].second) < c * dt))
        throw validation_error("worldline path: segment is not timelike");
    }
    Worldline w;
    w.path_ = std::move(knots);
    return w;
  }

  bool is_static() const { return path_.empty(); }

  Vec3 position(double t) const {
    if (is_static()) return static_position_;
    return Vec3(x_at(t), 0.0, 0.0);
  }

  Vec3 static_position() const {
    if (!is_static()) throw domain_error("worldline: not a fixed-position worldline");
    return static_position_;
  }

  double x_at(double t) const {
    if (is_static()) return static_position_.x();
    if (t <= path_.front().first) return path_.front().second;
    if (t >= path_.back().first) return path_.back().second;
    std::size_t lo = 0, hi = path_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (path_[mid].first <= t ? lo : hi) = mid;
    }
    const auto& [t0, x0] = path_[lo];
    const auto& [t1, x1] = path_[lo + 1];
    return x0 + (x1 - x0) * (t - t0) / (t1 - t0);
  }

  const std::vector<std::pair<double, double>>& path_knots() const { return path_; }

private:
  Vec3 static_position_ = Vec3::Zero();
  std::vector<std::pair<double, double>> path_;
};

}  // namespace logsync
