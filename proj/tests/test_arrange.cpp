#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "logsync/arrange.hpp"
#include "logsync/minimax.hpp"
#include "support/oracles.hpp"

using namespace logsync;
using Catch::Approx;

namespace {

// Independent reconstruction of the ring: oracle light times (fine-step chord
// quadrature) and plain secant iteration, no shared solver code.
double oracle_ring_phase(double mu, std::int64_t n, double p_tau,
                         const PhysicalConstants& k) {
  const auto g = Metric::fermi_normal_static(mu, k);
  const double c = k.c;
  const double scale = double(n) * p_tau * c;

  const auto period = [&](double xb) {
    return p_tau / std::sqrt(g.lapse2({xb, 0, 0}));
  };
  const auto secant = [](const std::function<double(double)>& f, double x0, double x1) {
    double f0 = f(x0), f1 = f(x1);
    for (int i = 0; i < 60 && std::abs(f1) > 1e-16; ++i) {
      const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
      x0 = x1;
      f0 = f1;
      x1 = x2;
      f1 = f(x1);
    }
    return x1;
  };

  const double xb = secant(
      [&](double x) {
        return oracle::chord_light_delay(g, {x, 0, 0}, {-x, 0, 0}) -
               2.0 * double(n) * period(x);
      },
      scale, scale * 1.0001);
  const double T = period(xb);
  const double rho = secant(
      [&](double r) {
        return oracle::chord_light_delay(g, {xb, 0, 0}, {0, r, 0}) - 2.0 * double(n) * T;
      },
      std::sqrt(3.0) * scale, std::sqrt(3.0) * scale * 1.0001);

  const Vec3 a0{0, rho, 0};
  const Vec3 a1{0, -rho / 2, rho * std::sqrt(3.0) / 2};
  const double dAA = oracle::chord_light_delay(g, a0, a1);
  return wrap_phase(dAA / T - 3.0 * double(n));
}

}  // namespace

TEST_CASE("predicted_phase") {
  SECTION("flat limit") { CHECK(predicted_phase(0.0, 1.0, 5, 1.0) == 0.0); }

  SECTION("cubic scaling in n") {
    const double p1 = predicted_phase(1e10, 3e7, 4, 1e-4);
    const double p2 = predicted_phase(1e10, 3e7, 8, 1e-4);
    CHECK(p2 / p1 == Approx(8.0).epsilon(1e-12));
    CHECK(p1 < 0.0);
  }

  SECTION("scaling laws: linear GM, quadratic p_tau, inverse cubic r") {
    const double base = predicted_phase(2e10, 3e7, 4, 1e-4);
    CHECK(predicted_phase(4e10, 3e7, 4, 1e-4) / base == Approx(2.0).epsilon(1e-12));
    CHECK(predicted_phase(2e10, 3e7, 4, 2e-4) / base == Approx(4.0).epsilon(1e-12));
    CHECK(predicted_phase(2e10, 6e7, 4, 1e-4) / base == Approx(0.125).epsilon(1e-12));
  }

  SECTION("|phi| crosses 1/2 exactly at the minimum period") {
    const auto k = PhysicalConstants::si();
    const double GM = k.G * 6.67e24, r = 3.0e7, L = 6.0e6;
    const double p_star = min_period(GM, L, r, k);
    // n consistent with the separation L ~ 2 n p c
    const auto n = static_cast<std::int64_t>(std::llround(L / (2.0 * p_star * k.c)));
    const double phi = predicted_phase(GM, r, n, p_star * (1.0 - 1e-9));
    CHECK(std::abs(phi) == Approx(0.5).epsilon(1e-6));
    CHECK_THROWS_AS(predicted_phase(GM, r, n, p_star * (1.0 + 1e-3)), domain_error);
  }
}

TEST_CASE("min_period and max_bitrate") {
  const auto k = PhysicalConstants::si();

  SECTION("earth-mass example") {
    const double p = min_period(k.G * 6.67e24, 6.0e6, 3.0e7, k);
    CHECK(p == Approx(1.115e-13).epsilon(2e-3));
    CHECK(p > 1.0e-13);
  }

  SECTION("bit rate") {
    CHECK(max_bitrate(1.0, 1e-13) == Approx(1e13).epsilon(1e-12));
    CHECK(max_bitrate(2.0, 1e-13) == Approx(2e13).epsilon(1e-12));
  }

  SECTION("no curvature, no bound") { CHECK(min_period(0.0, 6.0e6, 3.0e7, k) == 0.0); }

  SECTION("bad arguments") {
    CHECK_THROWS_AS(min_period(1.0, -1.0, 1.0, k), domain_error);
    CHECK_THROWS_AS(max_bitrate(0.0, 1.0), domain_error);
  }
}

TEST_CASE("solve_two_machine") {
  const auto g = Metric::flat(PhysicalConstants::natural());
  const auto A = OpenMachine::fixed("A", {0, 0, 0}, g, RateSchedule::constant(1.0));

  SECTION("uniform clock, delta = 3: B at distance 1.5 p c") {
    const auto sol = solve_two_machine(A, g, 3, 0, 12);
    REQUIRE(!sol.tick_times.empty());
    for (std::size_t i = 0; i < sol.tick_times.size(); ++i) {
      CHECK(sol.tick_positions_right[i] == Approx(1.5).margin(1e-12));
      CHECK(sol.tick_positions_left[i] == Approx(-1.5).margin(1e-12));
      CHECK(sol.tick_times[i] == Approx(1.5 + double(i)).margin(1e-12));
    }
  }

  SECTION("simulated channels have null phases and echo count 3 both ways") {
    const auto sol = solve_two_machine(A, g, 3, 0, 12);
    std::vector<Transmission> sched;
    for (int m = 2; m <= 6; ++m) sched.push_back({"A", double(m), "B_right", true});
    sched.push_back({"B_right", 5.0, "A", true});
    auto machines = std::vector<OpenMachine>{A, sol.b_right};
    const auto log = simulate_signals(machines, g, sched);
    for (const auto& ev : log)
      if (ev.kind == EventKind::Receive) CHECK(std::abs(ev.reading.phi) < 1e-9);
    const auto aba = echo_count(log, "A", "B_right");
    const auto bab = echo_count(log, "B_right", "A");
    REQUIRE(aba.has_value());
    REQUIRE(bab.has_value());
    CHECK(aba->value == Approx(3.0).margin(1e-9));
    CHECK(bab->value == Approx(3.0).margin(1e-9));
  }

  SECTION("the image of B depends on A's clock rate") {
    const auto A_fast = OpenMachine::fixed(
        "A", {0, 0, 0}, g,
        RateSchedule::piecewise_constant({{0.0, 1.0}, {4.0, 2.0}}));
    const auto s1 = solve_two_machine(A, g, 3, 0, 12);
    const auto s2 = solve_two_machine(A_fast, g, 3, 0, 12);
    bool image_changed = false;
    for (std::size_t i = 0; i < std::min(s1.tick_positions_right.size(),
                                         s2.tick_positions_right.size());
         ++i)
      if (std::abs(s1.tick_positions_right[i] - s2.tick_positions_right[i]) > 1e-9)
        image_changed = true;
    CHECK(image_changed);
  }

  SECTION("input validation") {
    CHECK_THROWS_AS(solve_two_machine(A, g, 0, 0, 10), validation_error);
    CHECK_THROWS_AS(solve_two_machine(A, g, 5, 0, 3), validation_error);
  }
}

TEST_CASE("construct_lacing") {
  const auto g = Metric::flat(PhysicalConstants::natural());

  SECTION("parallel static images, n=1: uniform bouncing at the round-trip period") {
    const auto a_img = Worldline::fixed({0, 0, 0});
    const auto b_img = Worldline::fixed({2, 0, 0});
    const auto sol = construct_lacing(a_img, b_img, g, 1.0, 1, 0.0, 30.0);
    REQUIRE(sol.a_touch_times.size() >= 3);
    for (std::size_t i = 1; i < sol.a_touch_times.size(); ++i)
      CHECK(sol.a_touch_times[i] - sol.a_touch_times[i - 1] == Approx(4.0).margin(1e-10));
  }

  SECTION("n=3 interpolated lacings give echo count 3") {
    const auto a_img = Worldline::fixed({0, 0, 0});
    const auto b_img = Worldline::fixed({2, 0, 0});
    const auto sol = construct_lacing(a_img, b_img, g, 1.0, 3, 0.0, 40.0);
    auto machines = std::vector<OpenMachine>{sol.a, sol.b};
    const auto log =
        simulate_signals(machines, g, {{"A", 3.0, "B", true}, {"B", 4.0, "A", true}});
    const auto aba = echo_count(log, "A", "B");
    const auto bab = echo_count(log, "B", "A");
    REQUIRE(aba.has_value());
    REQUIRE(bab.has_value());
    CHECK(aba->value == Approx(3.0).margin(1e-9));
    CHECK(bab->value == Approx(3.0).margin(1e-9));
  }

  SECTION("curvy order-preserving images still lace with null phases") {
    const auto a_img = Worldline::path_1d({{0, 0}, {12, 1.1}, {25, 0.2}, {40, 0.9}}, 1.0);
    const auto b_img = Worldline::path_1d({{0, 4}, {15, 3.2}, {30, 4.4}, {40, 3.9}}, 1.0);
    const auto sol = construct_lacing(a_img, b_img, g, 9.0, 2, 0.0, 40.0);

    std::vector<Transmission> sched;
    for (int m = 0; m <= 2; ++m) sched.push_back({"A", double(m), "B", false});
    auto machines = std::vector<OpenMachine>{sol.a, sol.b};
    const auto log = simulate_signals(machines, g, sched);
    int receptions = 0;
    for (const auto& ev : log)
      if (ev.kind == EventKind::Receive) {
        CHECK(std::abs(ev.reading.phi) < 1e-8);
        ++receptions;
      }
    CHECK(receptions == 3);
  }

  SECTION("coincident images are rejected") {
    const auto a_img = Worldline::fixed({0, 0, 0});
    CHECK_THROWS_AS(construct_lacing(a_img, a_img, g, 1.0, 1, 0.0, 10.0), domain_error);
  }
}

TEST_CASE("solve_tetrahedron") {
  const auto k = PhysicalConstants::natural();
  const std::int64_t n = 4;
  const double p_tau = 0.25;
  const double edge = double(n) * p_tau * k.c;  // = 1

  SECTION("flat: regular tetrahedron with edge n p c") {
    const auto arr = solve_tetrahedron(Metric::flat(k), p_tau, n);
    REQUIRE(arr.machines.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) {
        const double d = (arr.machines[i].worldline.static_position() -
                          arr.machines[j].worldline.static_position())
                             .norm();
        CHECK(d == Approx(edge).epsilon(1e-9));
      }
    for (const auto& m : measure_channels(arr)) {
      CHECK(std::abs(m.phase) < 1e-9);
      CHECK(m.echo_count == Approx(2.0 * double(n)).margin(1e-9));
    }
  }

  SECTION("gentle curvature: all six channels null, echo counts exactly 2n") {
    const double mu = 1e-3 / (edge * edge) * 0.5;
    const auto g = Metric::fermi_normal_static(mu, k);
    const auto arr = solve_tetrahedron(g, p_tau, n);
    for (const auto& m : measure_channels(arr)) {
      CHECK(std::abs(m.phase) < 1e-6);
      CHECK(std::llround(m.echo_count) == 2 * n);
      CHECK(std::abs(m.echo_count - 2.0 * double(n)) < 1e-6);
    }
    // curvature actually moved the vertices
    const auto flat = solve_tetrahedron(Metric::flat(k), p_tau, n);
    double moved = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
      moved = std::max(moved, (arr.machines[i].worldline.static_position() -
                               flat.machines[i].worldline.static_position())
                                  .norm());
    CHECK(moved > 1e-7 * edge);
  }

  SECTION("validity-boundary curvature still converges") {
    const double mu = 1e-3 / (edge * edge) * 0.9;
    const auto g = Metric::fermi_normal_static(mu, k);
    const auto arr = solve_tetrahedron(g, p_tau, n);
    for (const auto& m : measure_channels(arr)) CHECK(std::abs(m.phase) < 1e-6);
  }
}

TEST_CASE("add_fifth") {
  const auto k = PhysicalConstants::natural();
  const std::int64_t n = 4;
  const double p_tau = 0.25;
  const double edge = double(n) * p_tau * k.c;

  SECTION("flat: mirror-image apex") {
    const auto tetra = solve_tetrahedron(Metric::flat(k), p_tau, n);
    const auto arr = add_fifth(Metric::flat(k), tetra, n);
    REQUIRE(arr.machines.size() == 5);
    REQUIRE(arr.channels.size() == 18);  // nine two-way channels
    const Vec3 p4 = machine_by_id(arr.machines, "V4").worldline.static_position();
    const Vec3 p5 = machine_by_id(arr.machines, "V5").worldline.static_position();
    const Vec3 p1 = machine_by_id(arr.machines, "V1").worldline.static_position();
    const Vec3 p2 = machine_by_id(arr.machines, "V2").worldline.static_position();
    const Vec3 p3 = machine_by_id(arr.machines, "V3").worldline.static_position();
    const Vec3 nrm = (p2 - p1).cross(p3 - p1).normalized();
    CHECK((p4 - p1).dot(nrm) * (p5 - p1).dot(nrm) < 0.0);  // opposite sides
    CHECK((p5 - p1).norm() == Approx(edge).epsilon(1e-9));
  }

  SECTION("curved: nine two-way channels verify null within 1e-6") {
    const double mu = 1e-3 / (edge * edge) * 0.5;
    const auto g = Metric::fermi_normal_static(mu, k);
    const auto arr = add_fifth(g, solve_tetrahedron(g, p_tau, n), n);
    for (const auto& m : measure_channels(arr)) {
      CHECK(std::abs(m.phase) < 1e-6);
      CHECK(std::llround(m.echo_count) == 2 * n);
    }
  }
}

TEST_CASE("solve_ring5") {
  const auto k = PhysicalConstants::natural();

  SECTION("flat: zero phase and exact flat geometry") {
    RingConfig cfg;
    cfg.n = 4;
    cfg.p_tau = 0.25;
    cfg.mu = 0.0;
    cfg.constants = k;
    const auto sol = solve_ring5(cfg);
    const double scale = double(cfg.n) * cfg.p_tau * k.c;
    CHECK(sol.measured_phase == Approx(0.0).margin(1e-12));
    CHECK(sol.x_b == Approx(scale).epsilon(1e-12));
    CHECK(sol.ring_radius == Approx(std::sqrt(3.0) * scale).epsilon(1e-12));
    // A-A chord = 3 n p c
    const Vec3 a0 = machine_by_id(sol.arrangement.machines, "A0").worldline.static_position();
    const Vec3 a1 = machine_by_id(sol.arrangement.machines, "A1").worldline.static_position();
    CHECK((a0 - a1).norm() == Approx(3.0 * scale).epsilon(1e-12));
    for (const auto& m : measure_channels(sol.arrangement))
      CHECK(std::abs(m.phase) < 1e-12);
  }

  SECTION("curved: measured phase matches the independent oracle route") {
    RingConfig cfg;
    cfg.n = 8;
    cfg.p_tau = 0.125;  // scale = 1
    cfg.mu = 2e-5;
    cfg.constants = k;
    const auto sol = solve_ring5(cfg);
    const double want = oracle_ring_phase(cfg.mu, cfg.n, cfg.p_tau, k);
    CHECK(sol.measured_phase == Approx(want).epsilon(1e-4));
    CHECK(sol.measured_phase < 0.0);
    CHECK(sol.max_null_residual_cycles < 1e-9);
    // the three A-A phases are equal by symmetry
    CHECK(sol.aa_phases[0] == Approx(sol.aa_phases[1]).margin(1e-12));
    CHECK(sol.aa_phases[1] == Approx(sol.aa_phases[2]).margin(1e-12));
  }

  SECTION("phase scales linearly in mu, cubically in n, quadratically in p_tau") {
    RingConfig base;
    base.n = 8;
    base.p_tau = 0.125;
    base.mu = 1e-5;
    base.constants = k;
    const double f0 = solve_ring5(base).measured_phase;

    auto scaled = base;
    scaled.mu = 2e-5;
    CHECK(solve_ring5(scaled).measured_phase / f0 == Approx(2.0).epsilon(2e-3));

    // doubling n at fixed scale n p c: phase scales as n (mu fixed)
    auto denser = base;
    denser.n = 16;
    denser.p_tau = base.p_tau / 2.0;
    CHECK(solve_ring5(denser).measured_phase / f0 == Approx(2.0).epsilon(2e-3));
  }

  SECTION("configuration validation") {
    RingConfig bad;
    bad.n = 4;
    bad.p_tau = 1.0;
    bad.mu = 0.4;  // violates both validity bounds
    bad.constants = k;
    CHECK_THROWS_AS(solve_ring5(bad), validation_error);
  }
}

TEST_CASE("is_frozen") {
  const auto k = PhysicalConstants::natural();
  const std::int64_t n = 4;
  const double p_tau = 0.25;
  const double edge = double(n) * p_tau * k.c;
  const double mu = 1e-3 / (edge * edge) * 0.3;
  const auto g = Metric::fermi_normal_static(mu, k);

  SECTION("four-machine tetrahedron is not frozen") {
    const auto rep = is_frozen(solve_tetrahedron(g, p_tau, n));
    CHECK_FALSE(rep.frozen);
    CHECK_FALSE(rep.degenerate);
  }

  SECTION("five machines with nine channels are not frozen") {
    const auto rep = is_frozen(add_fifth(g, solve_tetrahedron(g, p_tau, n), n));
    CHECK_FALSE(rep.frozen);
    CHECK_FALSE(rep.degenerate);
  }

  SECTION("the ten-channel complete graph is frozen with a witness") {
    RingConfig cfg;
    cfg.n = n;
    cfg.p_tau = p_tau;
    cfg.mu = 1e-6;
    cfg.constants = k;
    const auto rep = is_frozen(solve_ring5(cfg).arrangement);
    CHECK(rep.frozen);
    CHECK_FALSE(rep.degenerate);
    CHECK_FALSE(rep.witness_machine.empty());
    CHECK(rep.coupled.size() >= 2);
  }

  SECTION("degenerate geometry is flagged") {
    Arrangement arr;
    arr.metric = Metric::flat(k);
    arr.coordinate_period = 1.0;
    arr.anchors = {{"M0", 1.0}};
    for (int i = 0; i < 3; ++i) {
      const auto id = "M" + std::to_string(i);
      arr.machines.push_back(OpenMachine::fixed_coordinate_period(
          id, {double(i + 1), 0.0, 0.0}, arr.metric, 1.0));
    }
    arr.channels = {{"M0", "M1", 2, 0}, {"M0", "M2", 2, 0}, {"M1", "M2", 2, 0}};
    const auto rep = is_frozen(arr);
    CHECK(rep.degenerate);
  }
}

TEST_CASE("minimax_phases") {
  const auto k = PhysicalConstants::natural();

  SECTION("flat space admits all-null for every m") {
    MinimaxConfig cfg;
    cfg.n = 2;
    cfg.p_tau = 0.5;
    cfg.restarts = 1;
    cfg.nm_iterations = 400;
    const auto flat = Metric::flat(k);
    for (const int m : {1, 5, 10}) {
      const auto res = minimax_phases(flat, cfg, m);
      CHECK(res.least_max_phase < 1e-9);
    }
  }

  SECTION("curved: m=3 reproduces the symmetric ring and m=10 <= m=1") {
    RingConfig rc;
    rc.n = 8;
    rc.p_tau = 0.125;
    rc.mu = 1e-5;
    rc.constants = k;
    const auto ring = solve_ring5(rc);

    MinimaxConfig cfg;
    cfg.n = rc.n;
    cfg.p_tau = rc.p_tau;
    cfg.restarts = 2;
    cfg.nm_iterations = 1500;
    const auto g = Metric::fermi_normal_static(rc.mu, k);

    const auto r3 = minimax_phases(g, cfg, 3);
    CHECK(r3.least_max_phase <= std::abs(ring.measured_phase) * 1.02 + 1e-9);
    CHECK(r3.least_max_phase >= std::abs(ring.measured_phase) * 0.25);

    const auto r1 = minimax_phases(g, cfg, 1);
    const auto r10 = minimax_phases(g, cfg, 10);
    CHECK(r10.least_max_phase <= r1.least_max_phase + 1e-9);
    CHECK(r1.least_max_phase > 0.0);
  }
}
