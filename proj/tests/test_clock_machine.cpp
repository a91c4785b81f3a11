#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "logsync/machine.hpp"
#include "logsync/simulate.hpp"
#include "support/oracles.hpp"

using namespace logsync;
using Catch::Approx;

namespace {

OpenMachine unit_machine(const std::string& id, double x, const Metric& g) {
  return OpenMachine::fixed(id, {x, 0.0, 0.0}, g, RateSchedule::constant(1.0));
}

}  // namespace

TEST_CASE("ClockReading convention") {
  SECTION("integers land on zero phase") {
    const auto r = ClockReading::from_value(3.0);
    CHECK(r.m == 3);
    CHECK(r.phi == 0.0);
  }

  SECTION("rounding picks the nearest cycle") {
    const auto r = ClockReading::from_value(3.6);
    CHECK(r.m == 4);
    CHECK(r.phi == Approx(-0.4).epsilon(1e-12));
  }

  SECTION("half-cycle boundary maps to (m, +1/2)") {
    const auto r = ClockReading::from_value(1.5);
    CHECK(r.m == 1);
    CHECK(r.phi == 0.5);
    const auto n = ClockReading::from_value(-0.5);
    CHECK(n.m == -1);
    CHECK(n.phi == 0.5);
  }

  SECTION("phase always in (-1/2, 1/2]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
      const auto r = ClockReading::from_value(u(rng));
      CHECK(r.phi > -0.5);
      CHECK(r.phi <= 0.5);
    }
  }
}

TEST_CASE("reading_at") {
  const auto g = Metric::flat(PhysicalConstants::natural());

  SECTION("unit-rate clock") {
    const auto m = unit_machine("A", 0.0, g);
    const auto r = reading_at(m, 3.0);
    CHECK(r.m == 3);
    CHECK(r.phi == Approx(0.0).margin(1e-15));
    const auto r2 = reading_at(m, 3.6);
    CHECK(r2.m == 4);
    CHECK(r2.phi == Approx(-0.4).epsilon(1e-12));
  }

  SECTION("rate doubled from t=0") {
    const auto m = OpenMachine::fixed(
        "A", {0, 0, 0}, g,
        RateSchedule::piecewise_constant({{-10.0, 1.0}, {0.0, 2.0}}));
    const auto r = reading_at(m, 1.5);
    CHECK(r.m == 3);
    CHECK(r.phi == Approx(0.0).margin(1e-12));
  }

  SECTION("window enforced when set") {
    auto m = unit_machine("A", 0.0, g);
    m.window = {{0.0, 10.0}};
    CHECK_THROWS_AS(reading_at(m, 11.0), domain_error);
    CHECK_NOTHROW(reading_at(m, 10.0));
  }
}

TEST_CASE("coordinate_time_of inverts reading_at") {
  const auto g = Metric::flat(PhysicalConstants::natural());

  SECTION("unit rate") {
    const auto m = unit_machine("A", 0.0, g);
    CHECK(coordinate_time_of(m, 5.0) == Approx(5.0).epsilon(1e-15));
  }

  SECTION("piecewise rate matches the bisection oracle") {
    const auto sched = RateSchedule::piecewise_linear({{0.0, 1.0}, {2.0, 3.0}, {5.0, 0.5}});
    const auto m = OpenMachine::fixed("A", {0, 0, 0}, g, sched);
    for (const double target : {0.7, 2.0, 4.9, 6.3}) {
      const double expected = oracle::bisect_increasing(
          [&](double t) { return m.clock.reading_value(t); }, target, -10.0, 40.0);
      CHECK(coordinate_time_of(m, target) == Approx(expected).margin(1e-9));
    }
  }

  SECTION("round trip identity within 1e-12 cycles") {
    const auto sched = RateSchedule::piecewise_linear(
        {{-1.0, 0.8}, {1.0, 2.2}, {3.0, 1.1}, {7.0, 4.0}});
    const auto m = OpenMachine::fixed("A", {0, 0, 0}, g, sched);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5.0, 12.0);
    for (int i = 0; i < 200; ++i) {
      const double t = u(rng);
      const double zeta = m.clock.reading_value(t);
      const double back = m.clock.reading_value(coordinate_time_of(m, zeta));
      CHECK(back == Approx(zeta).margin(1e-12));
    }
  }

  SECTION("proper rate feeds the clock in curved space") {
    const auto k = PhysicalConstants::natural();
    const auto gc = Metric::fermi_normal_static(1e-4, k);
    const Vec3 p{1.0, 0.0, 0.0};
    const auto m = OpenMachine::fixed("A", p, gc, RateSchedule::constant(1.0));
    const double R = proper_rate(gc, p);
    CHECK(m.clock.reading_value(2.0) == Approx(2.0 * R).epsilon(1e-14));
  }
}

TEST_CASE("simulate_signals") {
  const auto g = Metric::flat(PhysicalConstants::natural());

  SECTION("one-way reception lands at d/c later") {
    const auto A = unit_machine("A", 0.0, g);
    const auto B = unit_machine("B", 1.5, g);
    const auto log = simulate_signals({A, B}, g, {{"A", 0.0, "B", false}});
    REQUIRE(log.size() == 2);
    CHECK(log[0].kind == EventKind::Transmit);
    CHECK(log[1].kind == EventKind::Receive);
    CHECK(log[1].machine == "B");
    CHECK(log[1].reading.m == 1);
    CHECK(log[1].reading.phi == Approx(0.5).epsilon(1e-12));
    CHECK(log[1].t == Approx(1.5).epsilon(1e-12));
  }

  SECTION("echo chain returns at reading 3.0") {
    const auto A = unit_machine("A", 0.0, g);
    const auto B = unit_machine("B", 1.5, g);
    const auto log = simulate_signals({A, B}, g, {{"A", 0.0, "B", true}});
    REQUIRE(log.size() == 4);
    const auto& back = log.back();
    CHECK(back.machine == "A");
    CHECK(back.kind == EventKind::Receive);
    CHECK(back.reading.value() == Approx(3.0).margin(1e-12));
  }

  SECTION("coincident machines are rejected") {
    const auto A = unit_machine("A", 0.0, g);
    const auto B = unit_machine("B", 0.0, g);
    CHECK_THROWS_AS(simulate_signals({A, B}, g, {{"A", 0.0, "B", false}}), domain_error);
  }

  SECTION("staticity: shifted emissions shift receptions rigidly") {
    const auto k = PhysicalConstants::natural();
    const auto gc = Metric::fermi_normal_static(3e-5, k);
    const auto A = OpenMachine::fixed("A", {0.9, 0, 0}, gc, RateSchedule::constant(1.0));
    const auto B = OpenMachine::fixed("B", {-0.4, 0.8, 0}, gc, RateSchedule::constant(1.0));
    const auto log1 = simulate_signals({A, B}, gc, {{"A", 0.0, "B", false}});
    const auto log2 = simulate_signals({A, B}, gc, {{"A", 7.25, "B", false}});
    const double d1 = log1[1].t - log1[0].t;
    const double d2 = log2[1].t - log2[0].t;
    CHECK(d1 == Approx(d2).epsilon(1e-12));
  }

  SECTION("1+1 path machines propagate along rays") {
    // receiver drifts away at 0.5c starting from x=2
    const auto path = Worldline::path_1d({{0.0, 2.0}, {10.0, 7.0}}, 1.0);
    const auto B = OpenMachine::on_path(
        "B", path, PiecewiseLinearMonotone::identity());
    const auto A = OpenMachine::on_path(
        "A", Worldline::path_1d({{0.0, 0.0}, {10.0, 0.0}}, 1.0),
        PiecewiseLinearMonotone::identity());
    const auto log = simulate_signals({A, B}, g, {{"A", 0.0, "B", false}});
    // x_B(t) = 2 + t/2 = t  =>  t = 4
    CHECK(log[1].t == Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("rate obliviousness of the logical record") {
  // Fixed schedule in readings; varying the rate schedules changes the
  // coordinate times but not which transmissions happen, their readings, or
  // how receptions pair with them.
  const auto g = Metric::flat(PhysicalConstants::natural());
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(1.0, 6.0);
  std::uniform_real_distribution<double> rd(0.0, 20.0);
  std::uniform_real_distribution<double> freq(0.5, 3.0);

  for (int trial = 0; trial < 50; ++trial) {
    const double xb = pos(rng);
    std::vector<Transmission> schedule;
    for (int i = 0; i < 8; ++i) {
      const bool a_to_b = rng() % 2 == 0;
      schedule.push_back({a_to_b ? "A" : "B", rd(rng), a_to_b ? "B" : "A", false});
    }

    auto run = [&](const RateSchedule& ra, const RateSchedule& rb) {
      const auto A = OpenMachine::fixed("A", {0, 0, 0}, g, ra);
      const auto B = OpenMachine::fixed("B", {xb, 0, 0}, g, rb);
      return simulate_signals({A, B}, g, schedule);
    };

    const auto log1 = run(RateSchedule::constant(1.0), RateSchedule::constant(1.0));
    const auto log2 = run(RateSchedule::piecewise_linear({{0.0, freq(rng)}, {5.0, freq(rng)}}),
                          RateSchedule::piecewise_constant({{0.0, freq(rng)}, {3.0, freq(rng)}}));

    // identical logical transmit sequence per machine, in reading order
    auto transmits = [](const EventLog& log, const std::string& id) {
      std::vector<std::pair<double, std::string>> out;
      for (const auto& ev : records_of(log, id))
        if (ev.kind == EventKind::Transmit)
          out.emplace_back(ev.reading.value(), ev.counterpart);
      return out;
    };
    CHECK(transmits(log1, "A") == transmits(log2, "A"));
    CHECK(transmits(log1, "B") == transmits(log2, "B"));

    // coordinate times are what varies
    auto times = [](const EventLog& log) {
      std::vector<double> out;
      for (const auto& ev : log) out.push_back(ev.t);
      return out;
    };
    CHECK(times(log1) != times(log2));

    // receptions pair with transmissions in the same order on every channel
    auto rx_count = [](const EventLog& log, const std::string& to) {
      int n = 0;
      for (const auto& ev : log)
        if (ev.kind == EventKind::Receive && ev.machine == to) ++n;
      return n;
    };
    CHECK(rx_count(log1, "A") == rx_count(log2, "A"));
    CHECK(rx_count(log1, "B") == rx_count(log2, "B"));
  }
}

TEST_CASE("monotone per-machine log") {
  const auto g = Metric::flat(PhysicalConstants::natural());
  const auto A = unit_machine("A", 0.0, g);
  const auto B = unit_machine("B", 2.5, g);
  std::vector<Transmission> schedule;
  for (int i = 0; i < 6; ++i) schedule.push_back({"A", double(i), "B", true});
  const auto log = simulate_signals({A, B}, g, schedule);

  for (const auto& id : {"A", "B"}) {
    const auto recs = records_of(log, id);
    for (std::size_t i = 1; i < recs.size(); ++i) {
      CHECK(recs[i].reading.value() >= recs[i - 1].reading.value());
      CHECK(recs[i].t >= recs[i - 1].t);
      const bool echo_tie = recs[i].t == recs[i - 1].t &&
                            recs[i - 1].kind == EventKind::Receive &&
                            recs[i].kind == EventKind::Transmit;
      if (!echo_tie) CHECK(recs[i].t > recs[i - 1].t);
    }
  }
}
