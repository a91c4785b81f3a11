// Channels as ordered sets of (transmit reading, receive reading) pairs,
// echo counts, repeating-structure detection, and the arrival-phase test
// behind logical synchronization.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logsync/machine.hpp"

namespace logsync {

struct PhaseTolerance {
  double eta = 0.1;

  void validate() const {
    if (!(eta > 0.0 && eta < 1.0))
      throw validation_error("phase tolerance: eta must lie in (0, 1)");
  }
};

// A symbol lands inside the receiver's writing phase iff |phi| < (1 - eta)/2.
inline bool phase_ok(double phi, const PhaseTolerance& tol) {
  tol.validate();
  if (!(phi > -0.5 && phi <= 0.5))
    throw domain_error("phase_ok: phase outside (-1/2, 1/2]");
  return std::abs(phi) < 0.5 * (1.0 - tol.eta);
}

struct Channel {
  struct Pair {
    ClockReading a;  // transmit reading at the source
    ClockReading b;  // receive reading at the destination
  };

  std::string from, to;
  std::vector<Pair> pairs;

  bool order_preserving() const {
    for (std::size_t i = 1; i < pairs.size(); ++i) {
      if (!(pairs[i].a.value() > pairs[i - 1].a.value())) return false;
      if (!(pairs[i].b.value() > pairs[i - 1].b.value())) return false;
    }
    return true;
  }
};

// All (transmit at a, receive at b) pairs of a log; the k-th transmission
// pairs with the k-th reception since channels preserve order.
inline Channel channel_from_log(const EventLog& log, const std::string& a,
                                const std::string& b) {
  std::vector<ClockReading> tx, rx;
  for (const auto& ev : log) {
    if (ev.machine == a && ev.kind == EventKind::Transmit && ev.counterpart == b)
      tx.push_back(ev.reading);
    if (ev.machine == b && ev.kind == EventKind::Receive && ev.counterpart == a)
      rx.push_back(ev.reading);
  }
  Channel ch{a, b, {}};
  const std::size_t n = std::min(tx.size(), rx.size());
  ch.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ch.pairs.push_back({tx[i], rx[i]});
  return ch;
}

// A channel whose pairs advance by fixed integer increments per step:
// (m0 + l j . phi_a, n0 + l k . phi_b) for l in the range.
struct RepeatingDescriptor {
  std::int64_t m0 = 0, n0 = 0;  // base cycle counts
  std::int64_t j = 1, k = 1;    // per-step increments
  double phi_a = 0.0, phi_b = 0.0;
  // inclusive window of l; unset means conceptually unbounded
  std::optional<std::pair<std::int64_t, std::int64_t>> ell_range;
};

inline Channel channel_from_descriptor(const RepeatingDescriptor& d,
                                       std::int64_t count = -1) {
  std::int64_t l1 = 0, l2 = count - 1;
  if (d.ell_range) {
    l1 = d.ell_range->first;
    l2 = d.ell_range->second;
  } else if (count < 0) {
    throw domain_error("channel_from_descriptor: unbounded descriptor needs a count");
  }
  Channel ch;
  for (std::int64_t l = l1; l <= l2; ++l) {
    ch.pairs.push_back({ClockReading{d.m0 + l * d.j, d.phi_a},
                        ClockReading{d.n0 + l * d.k, d.phi_b}});
  }
  return ch;
}

// Fits the arithmetic structure of a repeating channel. Cycle counts must
// advance by exact integers; the per-pair phase residuals must agree with the
// base pair's within tol_cycles. Needs at least 3 pairs.
inline std::optional<RepeatingDescriptor> detect_repeating(const Channel& ch,
                                                           double tol_cycles = 1e-9) {
  const auto& ps = ch.pairs;
  if (ps.size() < 3) return std::nullopt;

  const double a0 = ps[0].a.value(), b0 = ps[0].b.value();
  const auto j = static_cast<std::int64_t>(std::llround(ps[1].a.value() - a0));
  const auto k = static_cast<std::int64_t>(std::llround(ps[1].b.value() - b0));
  if (j < 1 || k < 1) return std::nullopt;

  for (std::size_t l = 0; l < ps.size(); ++l) {
    const double da = ps[l].a.value() - (a0 + double(l) * double(j));
    const double db = ps[l].b.value() - (b0 + double(l) * double(k));
    if (std::abs(da) > tol_cycles || std::abs(db) > tol_cycles) return std::nullopt;
  }

  RepeatingDescriptor d;
  d.m0 = ps[0].a.m;
  d.n0 = ps[0].b.m;
  d.j = j;
  d.k = k;
  d.phi_a = ps[0].a.phi;
  d.phi_b = ps[0].b.phi;
  d.ell_range = {{0, static_cast<std::int64_t>(ps.size()) - 1}};
  return d;
}

struct EchoCount {
  double value = 0.0;  // sender cycles from transmission to echo reception
};

// First complete a -> b -> a echo in the log with immediate re-emission at b.
inline std::optional<EchoCount> echo_count(const EventLog& log, const std::string& a,
                                           const std::string& b) {
  // pair transmissions with receptions per direction, in order
  std::vector<const EventRecord*> tx_ab, rx_ab, tx_ba, rx_ba;
  for (const auto& ev : log) {
    if (ev.machine == a && ev.kind == EventKind::Transmit && ev.counterpart == b)
      tx_ab.push_back(&ev);
    if (ev.machine == b && ev.kind == EventKind::Receive && ev.counterpart == a)
      rx_ab.push_back(&ev);
    if (ev.machine == b && ev.kind == EventKind::Transmit && ev.counterpart == a)
      tx_ba.push_back(&ev);
    if (ev.machine == a && ev.kind == EventKind::Receive && ev.counterpart == b)
      rx_ba.push_back(&ev);
  }
  for (std::size_t i = 0; i < std::min(tx_ab.size(), rx_ab.size()); ++i) {
    // immediate echo: a transmission at b carrying the same reading as the reception
    for (std::size_t q = 0; q < tx_ba.size(); ++q) {
      if (std::abs(tx_ba[q]->reading.value() - rx_ab[i]->reading.value()) > 1e-12) continue;
      if (q >= rx_ba.size()) break;
      const double delta = rx_ba[q]->reading.value() - tx_ab[i]->reading.value();
      if (delta > 0.0) return EchoCount{delta};
    }
  }
  return std::nullopt;
}

}  // namespace logsync
