// Signal propagation between open machines.
//
// Fixed-position machines propagate through the metric's null-path solver;
// 1+1-dimensional path machines (flat space only) propagate along explicit
// left/right light rays intersected with the receiver's worldline image.

#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "logsync/light_time.hpp"
#include "logsync/machine.hpp"

namespace logsync {

struct Transmission {
  std::string from;
  double reading = 0.0;  // sender reading triggering the transmission
  std::string to;
  bool echo = false;  // immediate re-emission at the receiver, back to the sender
};

namespace detail {

// Earliest intersection of the future light cone of (t0, x0) with the 1+1
// worldline image of `w`. Segments are linear, so each branch is a linear solve.
inline double ray_arrival_1d(const Worldline& w, double t0, double x0, double c,
                             const std::string& from, const std::string& to) {
  const double kEps = 1e-12;
  double best = std::numeric_limits<double>::infinity();

  auto consider_segment = [&](double ta, double xa, double tb, double xb) {
    const double slope = (xb - xa) / (tb - ta);
    for (const double s : {+1.0, -1.0}) {
      // solve xa + slope (t - ta) = x0 + s c (t - t0)
      const double denom = slope - s * c;
      if (denom == 0.0) continue;
      const double t = (x0 - xa + slope * ta - s * c * t0) / denom;
      if (t > t0 + kEps && t >= ta - kEps && t <= tb + kEps) best = std::min(best, t);
    }
  };

  const auto& ks = w.path_knots();
  if (ks.empty()) {
    // static receiver in 1+1: x constant
    const double x = w.static_position().x();
    if (x != x0) best = t0 + std::abs(x - x0) / c;
  } else {
    for (std::size_t i = 0; i + 1 < ks.size(); ++i)
      consider_segment(ks[i].first, ks[i].second, ks[i + 1].first, ks[i + 1].second);
    // at-rest extensions beyond the knot span, handled exactly
    const double t_head = t0 + std::abs(ks.front().second - x0) / c;
    if (t_head > t0 + kEps && t_head <= ks.front().first + kEps)
      best = std::min(best, t_head);
    const double t_tail = t0 + std::abs(ks.back().second - x0) / c;
    if (t_tail > t0 + kEps && t_tail >= ks.back().first - kEps)
      best = std::min(best, t_tail);
  }

  if (!std::isfinite(best)) {
    std::ostringstream msg;
    msg << "signal propagation failed for pair (" << from << ", " << to
        << "): no future light-cone intersection from t=" << t0 << ", x=" << x0;
    throw numerical_error(msg.str());
  }
  return best;
}

inline double arrival_time(const Metric& metric, const OpenMachine& from,
                           const OpenMachine& to, double t_tx) {
  if (from.worldline.is_static() && to.worldline.is_static()) {
    const Vec3 a = from.worldline.static_position();
    const Vec3 b = to.worldline.static_position();
    if ((a - b).norm() == 0.0)
      throw domain_error("simulate_signals: machines '" + from.id + "' and '" + to.id +
                         "' occupy the same position");
    return t_tx + coordinate_light_delay(metric, a, b);
  }
  if (!metric.is_flat())
    throw domain_error("simulate_signals: path worldlines require a flat metric");
  const double x0 = from.worldline.x_at(t_tx);
  if (!to.worldline.is_static() || !from.worldline.is_static()) {
    return ray_arrival_1d(to.worldline, t_tx, x0, metric.constants().c, from.id, to.id);
  }
  return t_tx;  // unreachable
}

}  // namespace detail

inline const OpenMachine& machine_by_id(const std::vector<OpenMachine>& machines,
                                        const std::string& id) {
  for (const auto& m : machines)
    if (m.id == id) return m;
  throw validation_error("unknown machine id '" + id + "'");
}

// Runs the schedule and returns the full event log, ordered by coordinate
// time. What is transmitted later arrives later on every channel; the
// simulation checks that and reports the offending pair otherwise.
inline EventLog simulate_signals(const std::vector<OpenMachine>& machines,
                                 const Metric& metric,
                                 const std::vector<Transmission>& schedule) {
  EventLog log;
  log.reserve(schedule.size() * 2);

  for (const auto& tx : schedule) {
    const auto& from = machine_by_id(machines, tx.from);
    const auto& to = machine_by_id(machines, tx.to);
    if (from.id == to.id)
      throw validation_error("simulate_signals: self-channel '" + from.id + "'");

    const double t_tx = coordinate_time_of(from, tx.reading);
    log.push_back({from.id, ClockReading::from_value(tx.reading), EventKind::Transmit,
                   to.id, t_tx});

    const double t_rx = detail::arrival_time(metric, from, to, t_tx);
    check_window(to, t_rx, "simulate_signals");
    const ClockReading rx = reading_at(to, t_rx);
    log.push_back({to.id, rx, EventKind::Receive, from.id, t_rx});

    if (tx.echo) {
      log.push_back({to.id, rx, EventKind::Transmit, from.id, t_rx});
      const double t_back = detail::arrival_time(metric, to, from, t_rx);
      check_window(from, t_back, "simulate_signals");
      log.push_back({from.id, reading_at(from, t_back), EventKind::Receive, to.id, t_back});
    }
  }

  std::stable_sort(log.begin(), log.end(), [](const EventRecord& a, const EventRecord& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.machine != b.machine) return a.machine < b.machine;
    return a.kind == EventKind::Receive && b.kind == EventKind::Transmit;
  });

  // order preservation per directed pair
  std::map<std::pair<std::string, std::string>, double> last_rx;
  for (const auto& ev : log) {
    if (ev.kind != EventKind::Receive) continue;
    const auto key = std::make_pair(ev.counterpart, ev.machine);
    const auto it = last_rx.find(key);
    if (it != last_rx.end() && ev.t < it->second)
      throw numerical_error("order preservation violated on channel (" + key.first + " -> " +
                            key.second + ")");
    last_rx[key] = ev.t;
  }
  return log;
}

// Records of one machine, ordered by reading (receptions before the
// transmissions they trigger at equal readings).
inline EventLog records_of(const EventLog& log, const std::string& id) {
  EventLog out;
  for (const auto& ev : log)
    if (ev.machine == id) out.push_back(ev);
  std::stable_sort(out.begin(), out.end(), [](const EventRecord& a, const EventRecord& b) {
    if (a.reading.value() != b.reading.value()) return a.reading.value() < b.reading.value();
    return a.kind == EventKind::Receive && b.kind == EventKind::Transmit;
  });
  return out;
}

}  // namespace logsync
