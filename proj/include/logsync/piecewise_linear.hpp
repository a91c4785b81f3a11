// Strictly increasing piecewise-linear maps with affine extension beyond the
// knot span. Closed under composition and inversion, both exact, which keeps
// the clock-adjustment group laws free of interpolation error.

#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "logsync/errors.hpp"

namespace logsync {

class PiecewiseLinearMonotone {
public:
  using Knot = std::pair<double, double>;  // (x, f(x))

  PiecewiseLinearMonotone() : knots_{{0.0, 0.0}, {1.0, 1.0}} {}

  explicit PiecewiseLinearMonotone(std::vector<Knot> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2)
      throw validation_error("piecewise-linear map needs at least two knots");
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      if (!(knots_[i].first > knots_[i - 1].first))
        throw validation_error("piecewise-linear map: knot abscissae must be strictly increasing");
      if (!(knots_[i].second > knots_[i - 1].second))
        throw validation_error("piecewise-linear map: knot values must be strictly increasing");
    }
  }

  static PiecewiseLinearMonotone identity() { return PiecewiseLinearMonotone(); }

  static PiecewiseLinearMonotone affine(double slope, double offset) {
    if (!(slope > 0.0)) throw validation_error("affine map: slope must be positive");
    return PiecewiseLinearMonotone({{0.0, offset}, {1.0, slope + offset}});
  }

  double operator()(double x) const {
    const auto [i, j] = bracket_x(x);
    return lerp(knots_[i].first, knots_[i].second, knots_[j].first, knots_[j].second, x);
  }

  double inverse_at(double y) const {
    const auto [i, j] = bracket_y(y);
    return lerp(knots_[i].second, knots_[i].first, knots_[j].second, knots_[j].first, y);
  }

  PiecewiseLinearMonotone inverse() const {
    std::vector<Knot> swapped(knots_.size());
    std::transform(knots_.begin(), knots_.end(), swapped.begin(),
                   [](const Knot& k) { return Knot{k.second, k.first}; });
    return PiecewiseLinearMonotone(std::move(swapped));
  }

  // f after g: knots wherever either map bends.
  friend PiecewiseLinearMonotone compose(const PiecewiseLinearMonotone& f,
                                         const PiecewiseLinearMonotone& g) {
    std::vector<double> xs;
    xs.reserve(g.knots_.size() + f.knots_.size());
    for (const auto& k : g.knots_) xs.push_back(k.first);
    for (const auto& k : f.knots_) xs.push_back(g.inverse_at(k.first));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-300 || a == b; }),
             xs.end());
    std::vector<Knot> ks;
    ks.reserve(xs.size());
    for (const double x : xs) {
      const double y = f(g(x));
      if (!ks.empty() && !(y > ks.back().second && x > ks.back().first)) continue;
      ks.push_back({x, y});
    }
    return PiecewiseLinearMonotone(std::move(ks));
  }

  const std::vector<Knot>& knots() const { return knots_; }

  double min_x() const { return knots_.front().first; }
  double max_x() const { return knots_.back().first; }

private:
  static double lerp(double x0, double y0, double x1, double y1, double x) {
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  }

  // Segment indices bounding x; end segments extend affinely.
  std::pair<std::size_t, std::size_t> bracket_x(double x) const {
    if (x <= knots_.front().first) return {0, 1};
    if (x >= knots_.back().first) return {knots_.size() - 2, knots_.size() - 1};
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                                     [](double v, const Knot& k) { return v < k.first; });
    const std::size_t j = static_cast<std::size_t>(it - knots_.begin());
    return {j - 1, j};
  }

  std::pair<std::size_t, std::size_t> bracket_y(double y) const {
    if (y <= knots_.front().second) return {0, 1};
    if (y >= knots_.back().second) return {knots_.size() - 2, knots_.size() - 1};
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), y,
                                     [](double v, const Knot& k) { return v < k.second; });
    const std::size_t j = static_cast<std::size_t>(it - knots_.begin());
    return {j - 1, j};
  }

  std::vector<Knot> knots_;
};

}  // namespace logsync
