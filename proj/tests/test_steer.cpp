#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "logsync/steer.hpp"

using namespace logsync;
using Catch::Approx;

TEST_CASE("step_plant") {
  SECTION("no noise, constant frequency") {
    DriftModel drift;  // both sigmas zero
    auto s = make_plant(drift, 0.0, 0.25);
    for (int i = 0; i < 10; ++i) s = step_plant(s, drift);
    CHECK(s.freq_error == 0.25);
    CHECK(s.phase == Approx(2.5).epsilon(1e-12));
  }

  SECTION("random-walk frequency variance grows linearly") {
    const int paths = 10000, steps = 64;
    DriftModel drift;
    drift.sigma_rw = 1e-3;
    double sum = 0.0, sum2 = 0.0;
    std::mt19937_64 seeder(314159);
    for (int p = 0; p < paths; ++p) {
      drift.seed = seeder();
      auto s = make_plant(drift);
      for (int t = 0; t < steps; ++t) s = step_plant(s, drift);
      sum += s.freq_error;
      sum2 += s.freq_error * s.freq_error;
    }
    const double var = sum2 / paths - (sum / paths) * (sum / paths);
    const double expected = drift.sigma_rw * drift.sigma_rw * steps;
    // sample variance of a Gaussian: relative sd ~ sqrt(2/paths); 3-sigma band
    const double band = 3.0 * std::sqrt(2.0 / paths);
    CHECK(var == Approx(expected).epsilon(band));
  }

  SECTION("fixed seed reruns bit-identically") {
    DriftModel drift{1e-4, 1e-6, 42};
    auto a = make_plant(drift);
    auto b = make_plant(drift);
    for (int i = 0; i < 1000; ++i) {
      a = step_plant(a, drift);
      b = step_plant(b, drift);
    }
    CHECK(a.phase == b.phase);
    CHECK(a.freq_error == b.freq_error);
  }
}

TEST_CASE("run_closed_loop") {
  SECTION("zero noise, zero initial error: deviation identically zero") {
    SteerConfig cfg;
    cfg.steps = 2000;
    const auto res = run_closed_loop(cfg);
    CHECK(res.rms_delta == 0.0);
    CHECK(res.stayed_in_window);
    CHECK_FALSE(res.sync_lost);
    for (const auto& s : res.series) CHECK(s.delta == 0.0);
  }

  SECTION("step frequency offset is rejected by the integral action") {
    SteerConfig cfg;
    cfg.steps = 20000;
    cfg.initial_freq_error = 1e-3;
    cfg.delay_cycles = 2;
    const auto res = run_closed_loop(cfg);
    CHECK(res.stayed_in_window);
    // settled: the tail deviation is orders below the initial ramp rate
    double tail = 0.0;
    for (std::size_t i = res.series.size() - 100; i < res.series.size(); ++i)
      tail = std::max(tail, std::abs(res.series[i].delta));
    CHECK(tail < 1e-9);
  }

  SECTION("loss of synchronization is flagged, run continues") {
    SteerConfig cfg;
    cfg.steps = 4000;
    cfg.initial_freq_error = 0.2;  // far too fast for the loop
    cfg.controller.kp = 1e-4;      // and nearly no control authority
    cfg.controller.ki = 0.0;
    cfg.controller.horizon = 2;
    const auto res = run_closed_loop(cfg);
    CHECK(res.sync_lost);
    CHECK(res.series.size() == 4000);
  }

  SECTION("deviation grows with the report delay (paired seeds)") {
    const std::vector<int> delays = {2, 4, 8, 16};
    std::vector<double> mean_rms(delays.size(), 0.0);
    const int n_seeds = 6;
    for (int seed = 0; seed < n_seeds; ++seed) {
      for (std::size_t di = 0; di < delays.size(); ++di) {
        SteerConfig cfg;
        cfg.steps = 20000;
        cfg.delay_cycles = delays[di];
        cfg.drift = {2e-4, 2e-6, 7000 + std::uint64_t(seed)};
        const auto res = run_closed_loop(cfg);
        CHECK(res.stayed_in_window);
        mean_rms[di] += res.rms_delta / n_seeds;
      }
    }
    for (std::size_t di = 1; di < delays.size(); ++di)
      CHECK(mean_rms[di] > mean_rms[di - 1]);
  }

  SECTION("deterministic series for identical config") {
    SteerConfig cfg;
    cfg.steps = 5000;
    cfg.drift = {1e-4, 1e-6, 99};
    const auto a = run_closed_loop(cfg);
    const auto b = run_closed_loop(cfg);
    REQUIRE(a.series.size() == b.series.size());
    for (std::size_t i = 0; i < a.series.size(); ++i) {
      CHECK(a.series[i].phi == b.series[i].phi);
      CHECK(a.series[i].action == b.series[i].action);
    }
    CHECK(to_csv(a.series) == to_csv(b.series));
  }

  SECTION("config validation") {
    SteerConfig cfg;
    cfg.delay_cycles = 0;
    CHECK_THROWS_AS(run_closed_loop(cfg), validation_error);
    SteerConfig cfg2;
    cfg2.phi0 = 0.48;  // outside the eta = 0.1 budget
    CHECK_THROWS_AS(run_closed_loop(cfg2), validation_error);
  }
}

TEST_CASE("estimate_mu_from_phases") {
  const auto k = PhysicalConstants::natural();
  const double mu_true = 3e-7;

  auto forward = [&](std::int64_t n, double p) {
    return -27.0 / 8.0 * k.c * k.c * double(n) * double(n) * double(n) * p * p * mu_true;
  };

  SECTION("noiseless observations recover mu exactly") {
    std::vector<RingObservation> obs;
    for (std::int64_t n : {4, 8, 16})
      for (double p : {0.05, 0.1})
        obs.push_back({n, p, forward(n, p)});
    const auto est = estimate_mu_from_phases(obs, k);
    CHECK(est.mu == Approx(mu_true).epsilon(1e-12));
    CHECK(est.stddev < 1e-18);
  }

  SECTION("zero curvature stays consistent with zero") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> noise(0.0, 1e-5);
    std::vector<RingObservation> obs;
    for (int i = 0; i < 100; ++i) obs.push_back({8, 0.1, noise(rng)});
    const auto est = estimate_mu_from_phases(obs, k);
    CHECK(est.ci95_low <= 0.0);
    CHECK(est.ci95_high >= 0.0);
  }

  SECTION("10% noise, 100 observations: within 10% at 95% confidence") {
    int within = 0, covered = 0;
    const int reps = 200;
    std::mt19937_64 rng(2025);
    for (int rep = 0; rep < reps; ++rep) {
      std::vector<RingObservation> obs;
      std::normal_distribution<double> unit(0.0, 1.0);
      for (int i = 0; i < 100; ++i) {
        const std::int64_t n = 4 + 4 * (i % 4);
        const double p = 0.05 + 0.01 * (i % 3);
        const double phi = forward(n, p);
        obs.push_back({n, p, phi * (1.0 + 0.1 * unit(rng))});
      }
      const auto est = estimate_mu_from_phases(obs, k);
      if (std::abs(est.mu - mu_true) / mu_true < 0.10) ++within;
      if (est.ci95_low <= mu_true && mu_true <= est.ci95_high) ++covered;
    }
    CHECK(within >= int(0.95 * reps));
    CHECK(covered >= int(0.90 * reps));
  }

  SECTION("estimator error shrinks like 1/sqrt(count)") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> unit(0.0, 1.0);
    const std::vector<int> counts = {50, 200, 800};
    std::vector<double> mean_err;
    for (const int count : counts) {
      double err = 0.0;
      const int reps = 300;
      for (int rep = 0; rep < reps; ++rep) {
        std::vector<RingObservation> obs;
        for (int i = 0; i < count; ++i) {
          const std::int64_t n = 4 + 4 * (i % 4);
          const double p = 0.05 + 0.01 * (i % 3);
          obs.push_back({n, p, forward(n, p) * (1.0 + 0.1 * unit(rng))});
        }
        err += std::abs(estimate_mu_from_phases(obs, k).mu - mu_true);
      }
      mean_err.push_back(err / reps);
    }
    const double slope = std::log(mean_err.back() / mean_err.front()) /
                         std::log(double(counts.back()) / double(counts.front()));
    CHECK(slope == Approx(-0.5).margin(0.15));
  }

  SECTION("underdetermined input is rejected") {
    std::vector<RingObservation> obs = {{4, 0.1, -1e-3}, {8, 0.1, -8e-3}};
    CHECK_THROWS_AS(estimate_mu_from_phases(obs, k), domain_error);
  }
}

TEST_CASE("check_aiming_point") {
  SECTION("all residuals within the budget") {
    const auto chk = check_aiming_point({0.01, -0.02, 0.015, 0.0}, 0.45);
    CHECK(chk.advice == AimingAdvice::InTolerance);
  }

  SECTION("zero-mean noise at twice the budget calls for re-steering") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 0.2);
    std::vector<double> residuals;
    for (int i = 0; i < 400; ++i) residuals.push_back(noise(rng));
    const auto chk = check_aiming_point(residuals, 0.1);
    CHECK(chk.advice == AimingAdvice::ReSteer);
  }

  SECTION("persistent bias matching a curvature shift calls for revision") {
    const auto k = PhysicalConstants::natural();
    const double shift = -27.0 / 8.0 * 1e-6 * 8 * 8 * 8 * 0.1 * 0.1;  // mu-shift signature
    std::mt19937_64 rng(9);
    std::normal_distribution<double> noise(0.0, std::abs(shift) / 50.0);
    std::vector<double> residuals;
    for (int i = 0; i < 400; ++i) residuals.push_back(shift + noise(rng));
    const auto chk = check_aiming_point(residuals, std::abs(shift) / 2.0);
    CHECK(chk.advice == AimingAdvice::ReviseMetric);
    (void)k;
  }
}
