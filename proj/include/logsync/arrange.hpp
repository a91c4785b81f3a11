// Constructive solvers for channel arrangements: the two-machine light-cone
// and lacing constructions, the four- and five-machine placements with null
// phases, the symmetric ring of five whose three remaining channels carry a
// curvature-dependent phase, the closed-form phase prediction and bit-rate
// bound, and the frozen-arrangement classifier.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "logsync/channel.hpp"
#include "logsync/light_time.hpp"
#include "logsync/newton.hpp"
#include "logsync/simulate.hpp"

namespace logsync {

struct DeclaredChannel {
  std::string from, to;
  double target_echo_count = 0.0;
  double target_phase = 0.0;
};

// Machines, declared channels, and at least one anchored proper period.
// Without an anchored period the scale is free and the arrangement could
// shrink to a point, hiding any curvature effect.
struct Arrangement {
  Metric metric = Metric::flat(PhysicalConstants::natural());
  std::vector<OpenMachine> machines;
  std::vector<DeclaredChannel> channels;
  std::vector<std::pair<std::string, double>> anchors;  // (machine id, p_tau)
  double coordinate_period = 1.0;  // common tick period in coordinate time
};

inline void validate_arrangement(const Arrangement& arr) {
  std::vector<std::string> bad;
  if (arr.anchors.empty())
    bad.push_back(
        "arrangement: at least one machine must carry an anchored proper period");
  for (const auto& m : arr.machines) {
    if (!m.worldline.is_static()) continue;
    if (!arr.metric.in_validity_domain(m.worldline.static_position()))
      bad.push_back("arrangement: machine '" + m.id + "' outside metric validity domain");
  }
  for (std::size_t i = 0; i < arr.machines.size(); ++i)
    for (std::size_t j = i + 1; j < arr.machines.size(); ++j)
      if (arr.machines[i].worldline.is_static() && arr.machines[j].worldline.is_static() &&
          (arr.machines[i].worldline.static_position() -
           arr.machines[j].worldline.static_position())
                  .norm() == 0.0)
        bad.push_back("arrangement: machines '" + arr.machines[i].id + "' and '" +
                      arr.machines[j].id + "' coincide");
  if (!bad.empty()) throw validation_error(bad);
}

struct ChannelMeasurement {
  std::string from, to;
  double nominal_cycles = 0.0;  // declared one-way cycle count
  double phase = 0.0;           // reception phase against the nominal
  double delay = 0.0;           // one-way coordinate light time
  double echo_count = 0.0;      // measured round-trip sender cycles
};

// Phases and echo counts of every declared channel, from transmissions at
// the senders' tick readings.
inline std::vector<ChannelMeasurement> measure_channels(const Arrangement& arr,
                                                        const NullPathOptions& opts = {}) {
  std::vector<ChannelMeasurement> out;
  out.reserve(arr.channels.size());
  for (const auto& ch : arr.channels) {
    const auto& from = machine_by_id(arr.machines, ch.from);
    const auto& to = machine_by_id(arr.machines, ch.to);
    ChannelMeasurement m;
    m.from = ch.from;
    m.to = ch.to;
    m.nominal_cycles = ch.target_echo_count / 2.0;
    const double t_tx = coordinate_time_of(from, 0.0);
    m.delay = coordinate_light_delay(arr.metric, from.worldline.static_position(),
                                     to.worldline.static_position(), opts);
    const double rv = to.clock.reading_value(t_tx + m.delay);
    m.phase = wrap_phase(rv - m.nominal_cycles);
    m.echo_count = from.clock.reading_value(t_tx + 2.0 * m.delay);
    out.push_back(m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms

// phi = -27 GM n^3 p_tau^2 / (8 r^3), valid while |phi| < 1/2.
inline double predicted_phase(double GM, double r, std::int64_t n, double p_tau) {
  if (!(r > 0.0)) throw domain_error("predicted_phase: r must be positive");
  if (!(GM >= 0.0)) throw domain_error("predicted_phase: GM must be non-negative");
  if (n < 1) throw domain_error("predicted_phase: n must be a positive integer");
  if (!(p_tau > 0.0)) throw domain_error("predicted_phase: p_tau must be positive");
  const double magnitude =
      27.0 * GM * double(n) * double(n) * double(n) * p_tau * p_tau / (8.0 * r * r * r);
  if (!(magnitude < 0.5))
    throw domain_error("predicted_phase: outside validity (27 GM n^3 p_tau^2 / (8 r^3) >= 1/2)");
  return -magnitude;
}

// Same prediction parametrized by the curvature parameter mu = GM/(c^2 r^3).
inline double predicted_phase_from_mu(double mu, double c, std::int64_t n, double p_tau) {
  const double magnitude =
      27.0 / 8.0 * mu * c * c * double(n) * double(n) * double(n) * p_tau * p_tau;
  if (!(magnitude < 0.5))
    throw domain_error("predicted_phase: outside validity (27 mu n^3 p_tau^2 c^2 / 8 >= 1/2)");
  return -magnitude;
}

// Lower bound on the proper period for phases to stay inside the writing
// window while the cluster sits at radius r: p_tau > 27 GM L^3 / (32 r^3 c^3).
inline double min_period(double GM, double separation, double r,
                         const PhysicalConstants& k) {
  if (!(GM >= 0.0) || !(separation > 0.0) || !(r > 0.0))
    throw domain_error("min_period: arguments must be positive (GM non-negative)");
  const double L3 = separation * separation * separation;
  return 27.0 * GM * L3 / (32.0 * r * r * r * k.c * k.c * k.c);
}

// b bits per character, one character per cycle.
inline double max_bitrate(double bits_per_character, double p_tau) {
  if (!(bits_per_character > 0.0) || !(p_tau > 0.0))
    throw domain_error("max_bitrate: arguments must be positive");
  return bits_per_character / p_tau;
}

// ---------------------------------------------------------------------------
// Two machines, 1+1 flat spacetime

struct TwoMachineSolution {
  OpenMachine b_right, b_left;  // one solution family on each side of A
  std::vector<double> tick_times;
  std::vector<double> tick_positions_right, tick_positions_left;
};

// Ticks of B at the intersections of A's future cone from reading m with the
// past cone into reading m + delta. The image of B, not just its clock rate,
// depends on A's clocking.
inline TwoMachineSolution solve_two_machine(const OpenMachine& a, const Metric& metric,
                                            std::int64_t delta, std::int64_t m0,
                                            std::int64_t m1) {
  if (!metric.is_flat())
    throw validation_error("solve_two_machine: needs a flat metric");
  if (delta < 1) throw validation_error("solve_two_machine: delta must be >= 1");
  if (m1 < m0 + delta)
    throw validation_error("solve_two_machine: reading window shorter than delta");
  const double c = metric.constants().c;

  TwoMachineSolution sol;
  std::vector<std::pair<double, double>> right_path, left_path, right_clock, left_clock;
  const std::int64_t reading_offset = (delta + 1) / 2;
  for (std::int64_t m = m0; m + delta <= m1; ++m) {
    const double t1 = coordinate_time_of(a, double(m));
    const double t2 = coordinate_time_of(a, double(m + delta));
    const double x1 = a.worldline.x_at(t1);
    const double x2 = a.worldline.x_at(t2);
    // right family: signal right from (t1,x1), echo left into (t2,x2)
    const double tb_r = 0.5 * (t1 + t2) + (x2 - x1) / (2.0 * c);
    const double xb_r = x1 + c * (tb_r - t1);
    // left family mirrors the rays
    const double tb_l = 0.5 * (t1 + t2) - (x2 - x1) / (2.0 * c);
    const double xb_l = x1 - c * (tb_l - t1);
    const double reading = double(m + reading_offset);
    sol.tick_times.push_back(tb_r);
    sol.tick_positions_right.push_back(xb_r);
    sol.tick_positions_left.push_back(xb_l);
    right_path.push_back({tb_r, xb_r});
    left_path.push_back({tb_l, xb_l});
    right_clock.push_back({tb_r, reading});
    left_clock.push_back({tb_l, reading});
  }

  auto build = [&](std::vector<std::pair<double, double>> path,
                   std::vector<std::pair<double, double>> clock, const char* id) {
    Worldline w = path.size() >= 2 ? Worldline::path_1d(std::move(path), c)
                                   : Worldline::fixed({path.front().second, 0, 0});
    return OpenMachine::on_path(id, std::move(w),
                                PiecewiseLinearMonotone(std::move(clock)));
  };
  sol.b_right = build(std::move(right_path), std::move(right_clock), "B_right");
  sol.b_left = build(std::move(left_path), std::move(left_clock), "B_left");
  return sol;
}

namespace detail {

// Latest event on `w` whose future-directed ray reaches (t0, x0): the
// time-reversed counterpart of ray_arrival_1d.
inline double ray_departure_1d(const Worldline& w, double t0, double x0, double c) {
  const double kEps = 1e-12;
  double best = -std::numeric_limits<double>::infinity();
  auto consider_segment = [&](double ta, double xa, double tb, double xb) {
    const double slope = (xb - xa) / (tb - ta);
    for (const double s : {+1.0, -1.0}) {
      const double denom = slope - s * c;
      if (denom == 0.0) continue;
      const double t = (x0 - xa + slope * ta - s * c * t0) / denom;
      if (t < t0 - kEps && t >= ta - kEps && t <= tb + kEps) best = std::max(best, t);
    }
  };
  const auto& ks = w.path_knots();
  if (ks.empty()) {
    const double x = w.static_position().x();
    if (x != x0) best = t0 - std::abs(x - x0) / c;
  } else {
    for (std::size_t i = 0; i + 1 < ks.size(); ++i)
      consider_segment(ks[i].first, ks[i].second, ks[i + 1].first, ks[i + 1].second);
    const double t_head = t0 - std::abs(ks.front().second - x0) / c;
    if (t_head < t0 - kEps && t_head <= ks.front().first + kEps)
      best = std::max(best, t_head);
    const double t_tail = t0 - std::abs(ks.back().second - x0) / c;
    if (t_tail < t0 - kEps && t_tail >= ks.back().first - kEps)
      best = std::max(best, t_tail);
  }
  if (!std::isfinite(best))
    throw numerical_error("lacing: no past light-cone intersection found");
  return best;
}

}  // namespace detail

struct LacingSolution {
  OpenMachine a, b;  // clockings over the window; images as supplied
  std::vector<double> a_touch_times, b_touch_times;
};

// Light signals lacing two freely chosen images define the tick events of
// both machines; n - 1 interpolated lacings raise the echo counts to n.
inline LacingSolution construct_lacing(const Worldline& image_a, const Worldline& image_b,
                                       const Metric& metric, double seed_time,
                                       std::int64_t n, double t_begin, double t_end) {
  if (!metric.is_flat()) throw validation_error("construct_lacing: needs a flat metric");
  if (n < 1) throw validation_error("construct_lacing: n must be >= 1");
  if (!(t_begin < seed_time && seed_time < t_end))
    throw validation_error("construct_lacing: seed time must lie inside the window");
  const double c = metric.constants().c;
  if (std::abs(image_a.x_at(seed_time) - image_b.x_at(seed_time)) == 0.0)
    throw domain_error("construct_lacing: images touch at the seed time");

  // one round trip of the lacing starting from an A event
  auto bounce_forward = [&](double t_on_a, double& t_on_b) {
    t_on_b = detail::ray_arrival_1d(image_b, t_on_a, image_a.x_at(t_on_a), c, "A", "B");
    return detail::ray_arrival_1d(image_a, t_on_b, image_b.x_at(t_on_b), c, "B", "A");
  };
  auto bounce_backward = [&](double t_on_a, double& t_on_b) {
    t_on_b = detail::ray_departure_1d(image_b, t_on_a, image_a.x_at(t_on_a), c);
    return detail::ray_departure_1d(image_a, t_on_b, image_b.x_at(t_on_b), c);
  };

  auto trace = [&](double seed, std::vector<double>& a_touches,
                   std::vector<double>& b_touches) {
    double t = seed, tb = 0.0;
    while (t <= t_end) {
      a_touches.push_back(t);
      const double next = bounce_forward(t, tb);
      if (tb <= t_end) b_touches.push_back(tb);
      if (!(next > t)) throw numerical_error("lacing: stalled while tracing forward");
      t = next;
    }
    t = seed;
    while (true) {
      const double prev = bounce_backward(t, tb);
      if (prev < t_begin) break;
      if (tb >= t_begin) b_touches.push_back(tb);
      a_touches.push_back(prev);
      if (!(prev < t)) throw numerical_error("lacing: stalled while tracing backward");
      t = prev;
    }
  };

  std::vector<double> a_touches, b_touches;
  trace(seed_time, a_touches, b_touches);

  // interpolated lacings between the seed event and the next touch
  if (n > 1) {
    double tb = 0.0;
    const double t_next = bounce_forward(seed_time, tb);
    for (std::int64_t q = 1; q < n; ++q) {
      const double interior =
          seed_time + (t_next - seed_time) * double(q) / double(n);
      trace(interior, a_touches, b_touches);
    }
  }

  std::sort(a_touches.begin(), a_touches.end());
  std::sort(b_touches.begin(), b_touches.end());

  auto clocking_from = [&](const std::vector<double>& touches, double origin) {
    std::vector<std::pair<double, double>> ks;
    ks.reserve(touches.size());
    for (std::size_t i = 0; i < touches.size(); ++i)
      ks.push_back({touches[i], origin + double(i)});
    if (ks.size() < 2)
      throw numerical_error("lacing: window too short to define a clocking");
    return PiecewiseLinearMonotone(std::move(ks));
  };

  const auto seed_it = std::lower_bound(a_touches.begin(), a_touches.end(), seed_time);
  const double a_origin = -double(seed_it - a_touches.begin());

  LacingSolution sol;
  sol.a = OpenMachine::on_path("A", image_a, clocking_from(a_touches, a_origin));
  sol.b = OpenMachine::on_path("B", image_b, clocking_from(b_touches, 0.0));
  sol.a_touch_times = std::move(a_touches);
  sol.b_touch_times = std::move(b_touches);
  return sol;
}

// ---------------------------------------------------------------------------
// Four and five machines at fixed spatial coordinates

namespace detail {

inline Arrangement make_arrangement(const Metric& metric,
                                    const std::vector<std::pair<std::string, Vec3>>& places,
                                    const std::vector<std::pair<std::string, std::string>>& pairs,
                                    double echo_target, double p_tau,
                                    const std::string& anchor_id, double T) {
  Arrangement arr;
  arr.metric = metric;
  arr.coordinate_period = T;
  for (const auto& [id, pos] : places) {
    auto m = OpenMachine::fixed_coordinate_period(id, pos, metric, T);
    if (id == anchor_id) m.proper_period = p_tau;
    arr.machines.push_back(std::move(m));
  }
  for (const auto& [u, v] : pairs) {
    arr.channels.push_back({u, v, echo_target, 0.0});
    arr.channels.push_back({v, u, echo_target, 0.0});
  }
  arr.anchors = {{anchor_id, p_tau}};
  validate_arrangement(arr);
  return arr;
}

}  // namespace detail

// Four machines like vertices of a regular tetrahedron: six two-way channels
// with null phases and echo counts 2n, for any gentle static curvature.
// V1 keeps the proper period p_tau; every machine ticks with the coordinate
// period corresponding to it.
inline Arrangement solve_tetrahedron(const Metric& metric, double p_tau, std::int64_t n,
                                     const NullPathOptions& path_opts = {}) {
  if (!(p_tau > 0.0)) throw validation_error("solve_tetrahedron: p_tau must be positive");
  if (n < 1) throw validation_error("solve_tetrahedron: n must be >= 1");
  const double c = metric.constants().c;
  const double edge = double(n) * p_tau * c;

  // regular tetrahedron centered at the origin
  const double s = edge / (2.0 * std::sqrt(2.0));
  std::array<Vec3, 4> v = {Vec3{s, s, s}, Vec3{s, -s, -s}, Vec3{-s, s, -s},
                           Vec3{-s, -s, s}};
  for (const auto& p : v) metric.require_valid(p, "solve_tetrahedron");

  const double T = p_tau / proper_rate(metric, v[0]);
  const double target = double(n) * T;

  static const std::array<std::pair<int, int>, 6> kEdges = {
      {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

  if (!metric.is_flat()) {
    // gauge: V1 fixed; V2 along e1; V3 in span(e1, e2); V4 free
    const Vec3 e1 = (v[1] - v[0]).normalized();
    Vec3 e2 = (v[2] - v[0]) - (v[2] - v[0]).dot(e1) * e1;
    e2.normalize();
    const Vec3 e3 = e1.cross(e2);

    Eigen::VectorXd q(6);
    q << (v[1] - v[0]).dot(e1), (v[2] - v[0]).dot(e1), (v[2] - v[0]).dot(e2),
        (v[3] - v[0]).dot(e1), (v[3] - v[0]).dot(e2), (v[3] - v[0]).dot(e3);

    auto positions = [&](const Eigen::VectorXd& p) {
      std::array<Vec3, 4> out = v;
      out[1] = v[0] + p(0) * e1;
      out[2] = v[0] + p(1) * e1 + p(2) * e2;
      out[3] = v[0] + p(3) * e1 + p(4) * e2 + p(5) * e3;
      return out;
    };
    auto residual = [&](const Eigen::VectorXd& p) {
      const auto pos = positions(p);
      Eigen::VectorXd r(6);
      for (std::size_t e = 0; e < kEdges.size(); ++e)
        r(e) = coordinate_light_delay(metric, pos[kEdges[e].first], pos[kEdges[e].second],
                                      path_opts) -
               target;
      return r;
    };

    NewtonOptions opts;
    opts.tolerance = 1e-12 * target;
    opts.fd_step = 1e-7 * edge;
    q = newton_solve(residual, q, opts, "solve_tetrahedron");
    v = positions(q);
  }

  std::vector<std::pair<std::string, Vec3>> places = {
      {"V1", v[0]}, {"V2", v[1]}, {"V3", v[2]}, {"V4", v[3]}};
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& [i, j] : kEdges) pairs.push_back({places[i].first, places[j].first});
  return detail::make_arrangement(metric, places, pairs, 2.0 * double(n), p_tau, "V1", T);
}

// Fifth machine placed like V4 but on the opposite side of the V1 V2 V3
// cluster, with two-way channels of echo count 2n to those three: nine
// two-way channels altogether.
inline Arrangement add_fifth(const Metric& metric, const Arrangement& tetra, std::int64_t n,
                             const NullPathOptions& path_opts = {}) {
  validate_arrangement(tetra);
  const double T = tetra.coordinate_period;
  const double target = double(n) * T;
  const Vec3 p1 = machine_by_id(tetra.machines, "V1").worldline.static_position();
  const Vec3 p2 = machine_by_id(tetra.machines, "V2").worldline.static_position();
  const Vec3 p3 = machine_by_id(tetra.machines, "V3").worldline.static_position();
  const Vec3 p4 = machine_by_id(tetra.machines, "V4").worldline.static_position();

  // mirror image of V4 through the V1 V2 V3 plane
  Vec3 normal = (p2 - p1).cross(p3 - p1).normalized();
  Vec3 v5 = p4 - 2.0 * (p4 - p1).dot(normal) * normal;

  if (!metric.is_flat()) {
    auto residual = [&](const Eigen::VectorXd& p) {
      const Vec3 x{p(0), p(1), p(2)};
      Eigen::VectorXd r(3);
      r(0) = coordinate_light_delay(metric, x, p1, path_opts) - target;
      r(1) = coordinate_light_delay(metric, x, p2, path_opts) - target;
      r(2) = coordinate_light_delay(metric, x, p3, path_opts) - target;
      return r;
    };
    NewtonOptions opts;
    opts.tolerance = 1e-12 * target;
    opts.fd_step = 1e-7 * (p2 - p1).norm();
    Eigen::VectorXd q(3);
    q << v5.x(), v5.y(), v5.z();
    q = newton_solve(residual, q, opts, "add_fifth");
    v5 = Vec3{q(0), q(1), q(2)};
  }

  Arrangement arr = tetra;
  auto m5 = OpenMachine::fixed_coordinate_period("V5", v5, metric, T);
  arr.machines.push_back(std::move(m5));
  for (const auto* id : {"V1", "V2", "V3"}) {
    arr.channels.push_back({"V5", id, 2.0 * double(n), 0.0});
    arr.channels.push_back({id, "V5", 2.0 * double(n), 0.0});
  }
  validate_arrangement(arr);
  return arr;
}

// ---------------------------------------------------------------------------
// The symmetric ring of five

struct RingConfig {
  std::int64_t n = 1;
  double p_tau = 1.0;  // anchored proper period of B1 [s]
  double mu = 0.0;     // curvature parameter [1/m^2]
  PhysicalConstants constants = PhysicalConstants::natural();

  void validate() const {
    std::vector<std::string> bad;
    constants.validate();
    if (n < 1) bad.push_back("ring: n must be a positive integer");
    if (!(p_tau > 0.0)) bad.push_back("ring: p_tau must be positive");
    if (!(mu >= 0.0)) bad.push_back("ring: mu must be non-negative");
    if (n >= 1 && p_tau > 0.0 && mu >= 0.0) {
      const double c = constants.c;
      const double phase_bound =
          27.0 / 8.0 * mu * double(n) * double(n) * double(n) * p_tau * p_tau * c * c;
      if (!(phase_bound < 0.5))
        bad.push_back("ring: validity bound violated (27 mu n^3 p_tau^2 c^2 / 8 >= 1/2)");
      const double extent = std::sqrt(3.0) * double(n) * p_tau * c;
      if (!(mu * extent * extent < Metric::kValidityBound))
        bad.push_back("ring: geometry exceeds the metric validity guard (mu*3(n p c)^2 >= 1e-3)");
    }
    if (!bad.empty()) throw validation_error(bad);
  }
};

struct RingSolution {
  Arrangement arrangement;
  double x_b = 0.0;         // B1 at (+x_b, 0, 0), B2 mirrored
  double ring_radius = 0.0; // A ring radius in the x = 0 plane
  double coordinate_period = 0.0;
  double measured_phase = 0.0;            // common A-A reception phase
  std::array<double, 3> aa_phases{};      // the three measured A-A phases
  double predicted = 0.0;                 // closed-form prediction
  double max_null_residual_cycles = 0.0;  // worst phase on the seven null channels
};

// Seven two-way channels (B1-B2, B1-Ai, B2-Ai) built with null phases and
// echo counts 4n; the three A-A channels then share one reception phase
// against their declared echo counts 6n.
inline RingSolution solve_ring5(const RingConfig& cfg,
                                const NullPathOptions& path_opts = {}) {
  cfg.validate();
  const double c = cfg.constants.c;
  const Metric metric = cfg.mu > 0.0
                            ? Metric::fermi_normal_static(cfg.mu, cfg.constants)
                            : Metric::flat(cfg.constants);
  const double scale = double(cfg.n) * cfg.p_tau * c;

  const auto a_position = [&](double rho, int k) {
    const double th = 2.0 * M_PI * double(k) / 3.0;
    return Vec3{0.0, rho * std::cos(th), rho * std::sin(th)};
  };

  Eigen::VectorXd q(2);
  q << scale, std::sqrt(3.0) * scale;  // flat solution: x_b = npc, rho = sqrt(3) npc

  const auto period_at = [&](double xb) {
    return cfg.p_tau / proper_rate(metric, Vec3{xb, 0.0, 0.0});
  };

  if (!metric.is_flat()) {
    auto residual = [&](const Eigen::VectorXd& p) {
      const double xb = p(0), rho = p(1);
      const Vec3 b1{xb, 0, 0}, b2{-xb, 0, 0};
      const double target = 2.0 * double(cfg.n) * period_at(xb);
      Eigen::VectorXd r(2);
      r(0) = coordinate_light_delay(metric, b1, b2, path_opts) - target;
      r(1) = coordinate_light_delay(metric, b1, a_position(rho, 0), path_opts) - target;
      return r;
    };
    NewtonOptions opts;
    opts.tolerance = 1e-13 * scale / c;
    opts.fd_step = 1e-7 * scale;
    q = newton_solve(residual, q, opts, "solve_ring5");
  }

  RingSolution sol;
  sol.x_b = q(0);
  sol.ring_radius = q(1);
  const double T = period_at(sol.x_b);
  sol.coordinate_period = T;

  std::vector<std::pair<std::string, Vec3>> places = {
      {"B1", {sol.x_b, 0, 0}},      {"B2", {-sol.x_b, 0, 0}},
      {"A0", a_position(q(1), 0)},  {"A1", a_position(q(1), 1)},
      {"A2", a_position(q(1), 2)}};

  // predicted phase for the A-A channels (dimensionless); 0 in flat space
  sol.predicted =
      cfg.mu > 0.0 ? predicted_phase_from_mu(cfg.mu, c, cfg.n, cfg.p_tau) : 0.0;

  Arrangement arr;
  arr.metric = metric;
  arr.coordinate_period = T;
  for (const auto& [id, pos] : places) {
    auto m = OpenMachine::fixed_coordinate_period(id, pos, metric, T);
    if (id == "B1") m.proper_period = cfg.p_tau;
    arr.machines.push_back(std::move(m));
  }
  arr.anchors = {{"B1", cfg.p_tau}};
  const double null_echo = 4.0 * double(cfg.n);
  for (const auto* x : {"B2", "A0", "A1", "A2"}) {
    arr.channels.push_back({"B1", x, null_echo, 0.0});
    arr.channels.push_back({x, "B1", null_echo, 0.0});
  }
  for (const auto* x : {"A0", "A1", "A2"}) {
    arr.channels.push_back({"B2", x, null_echo, 0.0});
    arr.channels.push_back({x, "B2", null_echo, 0.0});
  }

  // the three A-A channels carry the common phase
  const double aa_echo = 6.0 * double(cfg.n);
  const std::array<std::pair<int, int>, 3> ring_pairs = {{{0, 1}, {1, 2}, {2, 0}}};
  for (std::size_t e = 0; e < ring_pairs.size(); ++e) {
    const Vec3 pa = a_position(q(1), ring_pairs[e].first);
    const Vec3 pb = a_position(q(1), ring_pairs[e].second);
    const double delay = coordinate_light_delay(metric, pa, pb, path_opts);
    sol.aa_phases[e] = wrap_phase(delay / T - 3.0 * double(cfg.n));
  }
  sol.measured_phase = sol.aa_phases[0];
  for (const auto& [i, j] : ring_pairs) {
    const std::string u = "A" + std::to_string(i), v = "A" + std::to_string(j);
    arr.channels.push_back({u, v, aa_echo, sol.measured_phase});
    arr.channels.push_back({v, u, aa_echo, sol.measured_phase});
  }
  validate_arrangement(arr);
  sol.arrangement = std::move(arr);

  // residual phases on the seven null two-way channels
  double worst = 0.0;
  for (const auto& m : measure_channels(sol.arrangement, path_opts)) {
    const bool is_aa = m.from[0] == 'A' && m.to[0] == 'A';
    if (!is_aa) worst = std::max(worst, std::abs(m.phase));
  }
  sol.max_null_residual_cycles = worst;
  return sol;
}

// ---------------------------------------------------------------------------
// Frozen arrangements

struct FrozenReport {
  bool frozen = false;
  bool degenerate = false;  // geometry too symmetric to classify reliably
  std::string witness_machine;
  std::vector<std::pair<std::string, std::string>> coupled;  // echo counts to the witness
  std::vector<double> singular_values;
  std::string detail;
};

// An arrangement is frozen when some echo count to a machine cannot change
// slightly while every other declared echo count stays put. Echo counts are
// monotone in the pairwise light times, so the question reduces to the rank
// of the edge-length Jacobian of the declared channel graph over all machine
// positions: a rank deficiency is a self-stress, i.e. a linear relation that
// pins each participating count to the others. The Jacobian is evaluated in
// the flat limit; curvature perturbs the relation at order mu, which is what
// makes a frozen arrangement carry curvature information.
inline FrozenReport is_frozen(const Arrangement& arr) {
  validate_arrangement(arr);
  std::set<std::pair<std::string, std::string>> edge_set;
  for (const auto& ch : arr.channels) {
    auto key = std::minmax(ch.from, ch.to);
    edge_set.insert({key.first, key.second});
  }
  const std::vector<std::pair<std::string, std::string>> edges(edge_set.begin(),
                                                               edge_set.end());
  const auto n_machines = arr.machines.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n_machines; ++i) index[arr.machines[i].id] = i;

  Eigen::MatrixXd J(edges.size(), 3 * n_machines);
  J.setZero();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto i = index.at(edges[e].first);
    const auto j = index.at(edges[e].second);
    const Vec3 pi = arr.machines[i].worldline.static_position();
    const Vec3 pj = arr.machines[j].worldline.static_position();
    const Vec3 u = (pi - pj).normalized();
    J.block<1, 3>(e, 3 * i) = u.transpose();
    J.block<1, 3>(e, 3 * j) = -u.transpose();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullU);
  FrozenReport rep;
  rep.singular_values.assign(svd.singularValues().data(),
                             svd.singularValues().data() + svd.singularValues().size());
  const double sigma_max = rep.singular_values.empty() ? 0.0 : rep.singular_values.front();
  std::size_t rank = 0;
  for (const double s : rep.singular_values)
    if (s > 1e-8 * sigma_max) ++rank;
  const std::size_t deficiency = edges.size() - rank;
  rep.frozen = deficiency >= 1;

  // generic rank for this graph: limited by the Euclidean isometries
  const std::size_t generic_rank =
      std::min(edges.size(), n_machines >= 3 ? 3 * n_machines - 6 : 3 * n_machines);
  if (rank < std::min(edges.size(), generic_rank) && !rep.frozen) rep.degenerate = true;
  if (deficiency > (edges.size() > generic_rank ? edges.size() - generic_rank : 0))
    rep.degenerate = true;

  if (rep.frozen) {
    // self-stress: left-null direction of J; its support names the coupled counts
    const Eigen::VectorXd w = svd.matrixU().col(static_cast<int>(edges.size()) - 1);
    const double wmax = w.cwiseAbs().maxCoeff();
    std::vector<std::size_t> support;
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (std::abs(w(e)) > 1e-6 * wmax) support.push_back(e);

    std::map<std::string, int> incident;
    for (const auto e : support) {
      incident[edges[e].first]++;
      incident[edges[e].second]++;
    }
    std::string witness;
    int most = 0;
    for (const auto& [id, cnt] : incident)
      if (cnt > most) {
        most = cnt;
        witness = id;
      }
    if (most < 2) {
      rep.degenerate = true;
    } else {
      rep.witness_machine = witness;
      for (const auto e : support)
        if (edges[e].first == witness || edges[e].second == witness) {
          const auto& other = edges[e].first == witness ? edges[e].second : edges[e].first;
          rep.coupled.push_back({other, witness});
        }
    }
  }

  std::ostringstream d;
  d << "edges=" << edges.size() << " rank=" << rank << " deficiency=" << deficiency;
  rep.detail = d.str();
  return rep;
}

}  // namespace logsync
