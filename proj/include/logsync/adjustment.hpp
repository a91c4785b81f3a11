// The group H of clock adjustments (monotone reparametrizations of clock
// readings), its action on transmission triggering, and membership testing
// plus the constructive family for the channel-invariance subgroup K(A,B).
//
// Adjustments are strictly increasing piecewise-linear maps, so composition
// and inversion are exact and the group laws hold to rounding error.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "logsync/channel.hpp"
#include "logsync/piecewise_linear.hpp"
#include "logsync/simulate.hpp"

namespace logsync {

class ClockAdjustment {
public:
  ClockAdjustment() : f_(PiecewiseLinearMonotone::identity()) {}
  explicit ClockAdjustment(PiecewiseLinearMonotone f) : f_(std::move(f)) {}

  static ClockAdjustment identity() { return ClockAdjustment(); }
  static ClockAdjustment affine(double slope, double offset) {
    return ClockAdjustment(PiecewiseLinearMonotone::affine(slope, offset));
  }
  static ClockAdjustment from_knots(std::vector<std::pair<double, double>> knots) {
    return ClockAdjustment(PiecewiseLinearMonotone(std::move(knots)));
  }

  double operator()(double zeta) const { return f_(zeta); }
  ClockAdjustment inverse() const { return ClockAdjustment(f_.inverse()); }
  const PiecewiseLinearMonotone& map() const { return f_; }

  friend ClockAdjustment compose(const ClockAdjustment& f, const ClockAdjustment& g) {
    return ClockAdjustment(compose(f.map(), g.map()));
  }

private:
  PiecewiseLinearMonotone f_;
};

inline double act(const ClockAdjustment& f, double zeta) { return f(zeta); }

// Transmissions triggered at given nominal readings occur, after adjusting
// the clock by f, at original readings f^-1(zeta).
inline double retrigger(const ClockAdjustment& f, double zeta) {
  return f.inverse()(zeta);
}

struct AdjustmentPair {
  ClockAdjustment f_a, f_b;
};

// Two machines joined by two-way null-phase repeating channels with constant
// echo count `echo_n`, transmitting at integer readings over the window.
struct TwoWayScenario {
  OpenMachine a, b;
  Metric metric = Metric::flat(PhysicalConstants::natural());
  std::int64_t echo_n = 1;
  std::int64_t first_tick = 0, last_tick = 8;  // A-side schedule window, inclusive
};

// A at the origin, B at radar distance echo_n/2 cycles, clocks phased so both
// two-way channels are null with echo count echo_n.
inline TwoWayScenario make_static_two_way_scenario(std::int64_t echo_n,
                                                   std::int64_t first_tick = 0,
                                                   std::int64_t last_tick = 8) {
  if (echo_n < 1) throw validation_error("two-way scenario: echo count must be >= 1");
  const Metric g = Metric::flat(PhysicalConstants::natural());
  const double d = 0.5 * double(echo_n);
  TwoWayScenario sc;
  sc.a = OpenMachine{"A", Worldline::fixed({0, 0, 0}),
                     ClockFunction::from_schedule(RateSchedule::constant(1.0), 1.0),
                     std::nullopt, std::nullopt};
  sc.b = OpenMachine{"B", Worldline::fixed({d, 0, 0}),
                     ClockFunction::from_schedule(RateSchedule::constant(1.0), 1.0, 0.0, -d),
                     std::nullopt, std::nullopt};
  sc.metric = g;
  sc.echo_n = echo_n;
  sc.first_tick = first_tick;
  sc.last_tick = last_tick;
  return sc;
}

namespace detail {

// Reading at `to` when `from` transmits at the given reading.
inline double transfer_reading(const TwoWayScenario& sc, const OpenMachine& from,
                               const OpenMachine& to, double reading) {
  const double t_tx = coordinate_time_of(from, reading);
  const double t_rx = arrival_time(sc.metric, from, to, t_tx);
  return to.clock.reading_value(t_rx);
}

}  // namespace detail

// Re-simulates both directions with retriggered schedules and compares the
// resulting channel pair sets against the originals.
inline bool is_invariant_pair(const AdjustmentPair& pair, const TwoWayScenario& sc,
                              double tol_cycles = 1e-9) {
  const auto fa_inv = pair.f_a.inverse();
  const auto fb_inv = pair.f_b.inverse();

  for (std::int64_t j = sc.first_tick; j <= sc.last_tick; ++j) {
    const double original_rx = detail::transfer_reading(sc, sc.a, sc.b, double(j));
    const double moved_rx =
        detail::transfer_reading(sc, sc.a, sc.b, fa_inv(double(j)));
    if (std::abs(pair.f_b(moved_rx) - original_rx) > tol_cycles) return false;
  }

  // B's own transmission lattice covers the readings it uses over the window
  const auto b_first = static_cast<std::int64_t>(
      std::llround(detail::transfer_reading(sc, sc.a, sc.b, double(sc.first_tick))));
  const auto b_last = static_cast<std::int64_t>(
      std::llround(detail::transfer_reading(sc, sc.a, sc.b, double(sc.last_tick))));
  for (std::int64_t n = b_first; n <= b_last; ++n) {
    const double original_rx = detail::transfer_reading(sc, sc.b, sc.a, double(n));
    const double moved_rx =
        detail::transfer_reading(sc, sc.b, sc.a, fb_inv(double(n)));
    if (std::abs(pair.f_a(moved_rx) - original_rx) > tol_cycles) return false;
  }
  return true;
}

// Constructive family for K(A,B): choose f_A^-1 on readings 0..N-1, subject
// to monotonicity and to f_A^-1(N-1) preceding the re-adjusted first echo of
// f_A^-1(0); extend periodically; f_B follows so each lacing maps to another
// lacing.
inline AdjustmentPair construct_invariant_partner(const TwoWayScenario& sc,
                                                  const std::vector<double>& f_a_inverse_choices) {
  const std::int64_t N = sc.echo_n;
  const auto& ch = f_a_inverse_choices;
  std::vector<std::string> bad;
  if (static_cast<std::int64_t>(ch.size()) != N)
    bad.push_back("invariant partner: need exactly N = " + std::to_string(N) + " choices");
  for (std::size_t i = 1; i < ch.size(); ++i)
    if (!(ch[i] > ch[i - 1]))
      bad.push_back("invariant partner: choices must be strictly increasing");
  if (!ch.empty() && !(ch.back() < ch.front() + double(N)))
    bad.push_back(
        "invariant partner: last choice must precede the re-adjusted first echo "
        "(f_A^-1(N-1) < f_A^-1(0) + N)");
  if (!bad.empty()) throw validation_error(bad);

  // periodic extension of f_A^-1 over the lattice window, with margin
  const std::int64_t j_lo = sc.first_tick - 2 * N;
  const std::int64_t j_hi = sc.last_tick + 2 * N;
  const auto f_inv_at = [&](std::int64_t j) {
    std::int64_t q = j / N, r = j % N;
    if (r < 0) {
      r += N;
      q -= 1;
    }
    return ch[static_cast<std::size_t>(r)] + double(q * N);
  };

  std::vector<std::pair<double, double>> inv_knots, fb_knots;
  inv_knots.reserve(static_cast<std::size_t>(j_hi - j_lo + 1));
  for (std::int64_t j = j_lo; j <= j_hi; ++j)
    inv_knots.push_back({double(j), f_inv_at(j)});
  const PiecewiseLinearMonotone fa_inv{inv_knots};

  for (std::int64_t j = j_lo; j <= j_hi; ++j) {
    const double x = detail::transfer_reading(sc, sc.a, sc.b, f_inv_at(j));
    const double y = detail::transfer_reading(sc, sc.a, sc.b, double(j));
    fb_knots.push_back({x, y});
  }

  return AdjustmentPair{ClockAdjustment(fa_inv.inverse()),
                        ClockAdjustment(PiecewiseLinearMonotone(std::move(fb_knots)))};
}

}  // namespace logsync
