// Clock readings and clock functions.
//
// A reading has the form m.phi: integer cycle count m plus in-cycle phase
// phi in (-1/2, 1/2]. The boundary convention maps a half-cycle exactly to
// (m, +1/2), never to (m+1, -1/2).

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "logsync/errors.hpp"
#include "logsync/piecewise_linear.hpp"

namespace logsync {

struct ClockReading {
  std::int64_t m = 0;  // cycle count
  double phi = 0.0;    // in-cycle phase, (-1/2, 1/2]

  double value() const { return static_cast<double>(m) + phi; }

  static ClockReading from_value(double zeta) {
    double cycle = std::ceil(zeta - 0.5);
    double phase = zeta - cycle;
    if (phase > 0.5) {
      cycle += 1.0;
      phase = zeta - cycle;
    } else if (phase <= -0.5) {
      cycle -= 1.0;
      phase = zeta - cycle;
    }
    return {static_cast<std::int64_t>(cycle), phase};
  }
};

inline bool operator<(const ClockReading& a, const ClockReading& b) {
  return a.value() < b.value();
}

// Wrap a cycle fraction into the phase convention (-1/2, 1/2].
inline double wrap_phase(double x) { return ClockReading::from_value(x).phi; }

// Piecewise clock frequency [cycles per local second] over the machine's
// local (proper) time. Finitely many pieces, positive everywhere; constant
// extension beyond the first and last knots.
class RateSchedule {
public:
  enum class Interp { Constant, Linear };

  static RateSchedule constant(double frequency) {
    return RateSchedule({{0.0, frequency}, {1.0, frequency}}, Interp::Constant);
  }

  static RateSchedule piecewise_constant(std::vector<std::pair<double, double>> knots) {
    return RateSchedule(std::move(knots), Interp::Constant);
  }

  static RateSchedule piecewise_linear(std::vector<std::pair<double, double>> knots) {
    return RateSchedule(std::move(knots), Interp::Linear);
  }

  Interp interpolation() const { return interp_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  double frequency_at(double u) const {
    if (u <= knots_.front().first) return knots_.front().second;
    if (u >= knots_.back().first) return knots_.back().second;
    const std::size_t i = piece_index(u);
    if (interp_ == Interp::Constant) return knots_[i].second;
    const auto& [u0, f0] = knots_[i];
    const auto& [u1, f1] = knots_[i + 1];
    return f0 + (f1 - f0) * (u - u0) / (u1 - u0);
  }

  // Integral of the frequency from local time 0 to u (signed).
  double cycles(double u) const { return antiderivative(u) - antiderivative(0.0); }

  // Inverse of cycles(); exact per piece (linear or quadratic solve).
  double invert_cycles(double target) const {
    const double c = target + antiderivative(0.0);
    // before the first knot: constant frequency f0
    if (c <= prefix_.front())
      return knots_.front().first + (c - prefix_.front()) / knots_.front().second;
    if (c >= prefix_.back())
      return knots_.back().first + (c - prefix_.back()) / knots_.back().second;
    std::size_t lo = 0, hi = knots_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (prefix_[mid] <= c ? lo : hi) = mid;
    }
    const double du = knots_[lo + 1].first - knots_[lo].first;
    const double y = c - prefix_[lo];
    const double f0 = knots_[lo].second;
    if (interp_ == Interp::Constant) return knots_[lo].first + y / f0;
    const double slope = (knots_[lo + 1].second - f0) / du;
    if (std::abs(slope) < 1e-300) return knots_[lo].first + y / f0;
    // solve f0 t + slope t^2 / 2 = y, stable branch
    const double disc = std::sqrt(f0 * f0 + 2.0 * slope * y);
    const double t = 2.0 * y / (f0 + disc);
    return knots_[lo].first + t;
  }

private:
  RateSchedule(std::vector<std::pair<double, double>> knots, Interp interp)
      : knots_(std::move(knots)), interp_(interp) {
    std::vector<std::string> bad;
    if (knots_.size() < 2) bad.push_back("rate schedule needs at least two knots");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (!(knots_[i].second > 0.0))
        bad.push_back("rate schedule: frequency must be positive everywhere");
      if (i > 0 && !(knots_[i].first > knots_[i - 1].first))
        bad.push_back("rate schedule: knot times must be strictly increasing");
      if (!bad.empty()) break;
    }
    if (!bad.empty()) throw validation_error(bad);
    prefix_.resize(knots_.size());
    prefix_[0] = 0.0;
    for (std::size_t i = 1; i < knots_.size(); ++i)
      prefix_[i] = prefix_[i - 1] + piece_integral(i - 1, knots_[i].first);
  }

  std::size_t piece_index(double u) const {
    std::size_t lo = 0, hi = knots_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (knots_[mid].first <= u ? lo : hi) = mid;
    }
    return lo;
  }

  // integral of the frequency over [knots_[i].first, u] with u inside piece i
  double piece_integral(std::size_t i, double u) const {
    const auto& [u0, f0] = knots_[i];
    const double t = u - u0;
    if (interp_ == Interp::Constant) return f0 * t;
    const auto& [u1, f1] = knots_[i + 1];
    const double slope = (f1 - f0) / (u1 - u0);
    return f0 * t + 0.5 * slope * t * t;
  }

  // cycles accumulated from the first knot to u
  double antiderivative(double u) const {
    if (u <= knots_.front().first)
      return knots_.front().second * (u - knots_.front().first);
    if (u >= knots_.back().first)
      return prefix_.back() + knots_.back().second * (u - knots_.back().first);
    const std::size_t i = piece_index(u);
    return prefix_[i] + piece_integral(i, u);
  }

  std::vector<std::pair<double, double>> knots_;
  std::vector<double> prefix_;
  Interp interp_;
};

// A machine clock: strictly increasing map from coordinate time to readings.
//
// ScheduleClock integrates a rate schedule in the machine's proper time and
// maps it to coordinate time through the (static-worldline) proper rate.
// KnotClock is an explicit piecewise-linear clocking, the representation the
// 1+1-dimensional constructions emit.
class ClockFunction {
public:
  ClockFunction() : impl_(PiecewiseLinearMonotone::identity()) {}  // unit-rate clock

  static ClockFunction from_schedule(RateSchedule schedule, double proper_rate,
                                     double epoch = 0.0, double zeta0 = 0.0) {
    if (!(proper_rate > 0.0))
      throw validation_error("clock: proper rate must be positive");
    ClockFunction cf;
    cf.impl_ = Schedule{std::move(schedule), proper_rate, epoch, zeta0};
    return cf;
  }

  static ClockFunction from_knots(PiecewiseLinearMonotone time_to_reading) {
    ClockFunction cf;
    cf.impl_ = std::move(time_to_reading);
    return cf;
  }

  double reading_value(double t) const {
    if (const auto* s = std::get_if<Schedule>(&impl_))
      return s->zeta0 + s->schedule.cycles(s->proper_rate * (t - s->epoch));
    return std::get<PiecewiseLinearMonotone>(impl_)(t);
  }

  double time_of_reading(double zeta) const {
    if (const auto* s = std::get_if<Schedule>(&impl_))
      return s->epoch + s->schedule.invert_cycles(zeta - s->zeta0) / s->proper_rate;
    return std::get<PiecewiseLinearMonotone>(impl_).inverse_at(zeta);
  }

private:
  struct Schedule {
    RateSchedule schedule;
    double proper_rate;
    double epoch;
    double zeta0;
  };

  std::variant<Schedule, PiecewiseLinearMonotone> impl_;
};

}  // namespace logsync
