// Open machines: adjustable-rate clocks bound to worldlines, plus the event
// records their communication produces.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "logsync/clock.hpp"
#include "logsync/errors.hpp"
#include "logsync/metric.hpp"
#include "logsync/worldline.hpp"

namespace logsync {

struct OpenMachine {
  std::string id;
  Worldline worldline;
  ClockFunction clock;
  std::optional<double> proper_period;  // anchored p_tau [s], if any
  std::optional<std::pair<double, double>> window;  // simulation window [s]

  // Fixed-position machine whose oscillator follows `rate` in its own proper
  // time; the proper rate at the position converts to coordinate time.
  static OpenMachine fixed(std::string id, const Vec3& position, const Metric& metric,
                           RateSchedule rate, std::optional<double> p_tau = std::nullopt) {
    const double R = proper_rate(metric, position);
    OpenMachine m{std::move(id), Worldline::fixed(position),
                  ClockFunction::from_schedule(std::move(rate), R), p_tau, std::nullopt};
    return m;
  }

  // Fixed-position machine ticking with a given coordinate period, phase
  // origin at coordinate time 0.
  static OpenMachine fixed_coordinate_period(std::string id, const Vec3& position,
                                             const Metric& metric, double coordinate_period,
                                             std::optional<double> p_tau = std::nullopt) {
    if (!(coordinate_period > 0.0))
      throw validation_error("machine: coordinate period must be positive");
    const double R = proper_rate(metric, position);
    // local frequency such that one cycle spans `coordinate_period` of t
    RateSchedule sched = RateSchedule::constant(1.0 / (R * coordinate_period));
    OpenMachine m{std::move(id), Worldline::fixed(position),
                  ClockFunction::from_schedule(std::move(sched), R), p_tau, std::nullopt};
    return m;
  }

  // 1+1-dimensional machine with an explicit clocking (time -> reading knots).
  static OpenMachine on_path(std::string id, Worldline path, PiecewiseLinearMonotone clocking,
                             std::optional<double> p_tau = std::nullopt) {
    return OpenMachine{std::move(id), std::move(path),
                       ClockFunction::from_knots(std::move(clocking)), p_tau, std::nullopt};
  }
};

inline void check_window(const OpenMachine& m, double t, const char* who) {
  if (m.window && (t < m.window->first || t > m.window->second))
    throw domain_error(std::string(who) + ": coordinate time outside simulation window of '" +
                       m.id + "'");
}

inline ClockReading reading_at(const OpenMachine& m, double t) {
  check_window(m, t, "reading_at");
  return ClockReading::from_value(m.clock.reading_value(t));
}

inline double coordinate_time_of(const OpenMachine& m, double reading_value) {
  const double t = m.clock.time_of_reading(reading_value);
  check_window(m, t, "coordinate_time_of");
  return t;
}

inline double coordinate_time_of(const OpenMachine& m, const ClockReading& r) {
  return coordinate_time_of(m, r.value());
}

enum class EventKind { Transmit, Receive };

inline const char* to_string(EventKind k) {
  return k == EventKind::Transmit ? "transmit" : "receive";
}

struct EventRecord {
  std::string machine;
  ClockReading reading;
  EventKind kind = EventKind::Transmit;
  std::string counterpart;
  double t = 0.0;  // coordinate time [s]
};

using EventLog = std::vector<EventRecord>;

}  // namespace logsync
