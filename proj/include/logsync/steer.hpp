// Feedback steering toward channel aiming points, oscillator drift models,
// and curvature re-estimation from observed ring phases.
//
// The drifting clock carries two noise terms per cycle: white frequency
// noise and a random walk of the frequency. Reports of the phase measured at
// the far machine come back only after the round-trip delay, so the
// controller steers on a linear extrapolation of the report trend across
// that horizon; the residual deviation necessarily grows with the delay.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "logsync/arrange.hpp"
#include "logsync/channel.hpp"
#include "logsync/exports.hpp"

namespace logsync {

struct DriftModel {
  double sigma_white = 0.0;  // white FM amplitude [fractional frequency / sqrt(step)]
  double sigma_rw = 0.0;     // random-walk FM step [fractional frequency / step]
  std::uint64_t seed = 0;

  void validate() const {
    if (sigma_white < 0.0 || sigma_rw < 0.0)
      throw validation_error("drift model: noise amplitudes must be non-negative");
  }
};

struct PlantState {
  double phase = 0.0;       // clock phase error [cycles]
  double freq_error = 0.0;  // fractional frequency offset [cycles/cycle]
  std::mt19937_64 rng;      // explicit generator state, never global
};

inline PlantState make_plant(const DriftModel& drift, double initial_phase = 0.0,
                             double initial_freq_error = 0.0) {
  drift.validate();
  PlantState s;
  s.phase = initial_phase;
  s.freq_error = initial_freq_error;
  s.rng.seed(drift.seed);
  return s;
}

namespace detail {

// Box-Muller; fully determined by the generator stream.
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = (double(rng() >> 11) + 0.5) * 0x1p-53;
  const double u2 = double(rng() >> 11) * 0x1p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace detail

// One clock cycle of free drift.
inline PlantState step_plant(PlantState state, const DriftModel& drift) {
  state.freq_error += drift.sigma_rw * detail::standard_normal(state.rng);
  state.phase += state.freq_error + drift.sigma_white * detail::standard_normal(state.rng);
  return state;
}

struct Controller {
  double kp = 0.0;  // proportional gain
  double ki = 0.0;  // integral gain
  int horizon = 0;  // prediction horizon [cycles]; 0 means the report delay

  // Gains that reject a frequency step and stay stable with the trend
  // predictor for delays up to a few tens of cycles.
  static Controller for_delay(int delay_cycles) {
    Controller c;
    c.kp = 0.3 / (1.0 + 0.5 * double(delay_cycles));
    c.ki = c.kp * c.kp / 8.0;
    c.horizon = delay_cycles;
    return c;
  }
};

struct SteerConfig {
  double phi0 = 0.0;  // aiming-point phase
  PhaseTolerance tolerance{0.1};
  int delay_cycles = 2;  // round-trip report delay Delta_BAB
  std::int64_t steps = 100000;
  DriftModel drift;
  Controller controller;  // zero-initialized: use Controller::for_delay(delay)
  double initial_phase = 0.0;
  double initial_freq_error = 0.0;
  std::int64_t record_every = 1;

  void validate() const {
    std::vector<std::string> bad;
    tolerance.validate();
    drift.validate();
    if (delay_cycles < 1) bad.push_back("steer: delay must be >= 1 cycle");
    if (steps < 1) bad.push_back("steer: steps must be >= 1");
    if (std::abs(phi0) >= 0.5 * (1.0 - tolerance.eta))
      bad.push_back("steer: aiming phase must satisfy |phi0| < (1 - eta)/2");
    if (!bad.empty()) throw validation_error(bad);
  }
};

struct DeviationSample {
  std::int64_t step = 0;
  double phi = 0.0;
  double phi0 = 0.0;
  double delta = 0.0;   // phi - phi0
  double action = 0.0;  // rate correction applied this cycle
};

struct SteerResult {
  std::vector<DeviationSample> series;
  bool stayed_in_window = true;  // every |phi| < (1 - eta)/2
  bool sync_lost = false;        // |phi| left the meaningful window (-1/2, 1/2]
  double rms_delta = 0.0;
  double max_abs_phi = 0.0;
};

inline SteerResult run_closed_loop(const SteerConfig& cfg) {
  cfg.validate();
  const int d = cfg.delay_cycles;
  const Controller ctl = (cfg.controller.kp == 0.0 && cfg.controller.ki == 0.0)
                             ? Controller::for_delay(d)
                             : cfg.controller;
  const int horizon = ctl.horizon > 0 ? ctl.horizon : d;
  const double bound = 0.5 * (1.0 - cfg.tolerance.eta);

  PlantState plant = make_plant(cfg.drift, cfg.initial_phase, cfg.initial_freq_error);
  std::vector<double> history;  // phase measured at the far machine, per cycle
  history.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  history.push_back(plant.phase);

  SteerResult res;
  res.series.reserve(static_cast<std::size_t>(cfg.steps / cfg.record_every) + 1);
  double integral = 0.0;
  double sum_sq = 0.0;

  for (std::int64_t t = 0; t < cfg.steps; ++t) {
    // report available now was measured d cycles ago
    double u = 0.0;
    if (t >= d) {
      const double report = history[static_cast<std::size_t>(t - d)];
      const std::int64_t back = t - d - horizon;
      const double older = back >= 0 ? history[static_cast<std::size_t>(back)] : report;
      const double slope = (report - older) / double(horizon);
      const double predicted = report + slope * double(d);
      const double err = predicted - cfg.phi0;
      integral += err;
      u = ctl.kp * err + ctl.ki * integral;
    }

    plant = step_plant(plant, cfg.drift);
    plant.phase -= u;
    history.push_back(plant.phase);

    const double delta = plant.phase - cfg.phi0;
    sum_sq += delta * delta;
    res.max_abs_phi = std::max(res.max_abs_phi, std::abs(plant.phase));
    if (std::abs(plant.phase) >= bound) res.stayed_in_window = false;
    if (std::abs(plant.phase) > 0.5) res.sync_lost = true;  // flagged, run continues

    if (t % cfg.record_every == 0)
      res.series.push_back({t, plant.phase, cfg.phi0, delta, u});
  }
  res.rms_delta = std::sqrt(sum_sq / double(cfg.steps));
  return res;
}

inline std::string to_csv(const std::vector<DeviationSample>& series) {
  std::string out = "step,phi,phi_0,delta,action\n";
  for (const auto& s : series) {
    out += std::to_string(s.step) + ',' + format_double(s.phi) + ',' +
           format_double(s.phi0) + ',' + format_double(s.delta) + ',' +
           format_double(s.action) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Curvature estimation from ring phases

struct RingObservation {
  std::int64_t n = 1;
  double p_tau = 1.0;
  double phase = 0.0;  // measured A-A reception phase
};

struct MuEstimate {
  double mu = 0.0;
  double stddev = 0.0;
  double ci95_low = 0.0, ci95_high = 0.0;
  std::size_t observations = 0;
};

// Least-squares inversion of the closed-form phase prediction: each
// observation contributes phase = -(27/8) c^2 n^3 p_tau^2 * mu + noise.
inline MuEstimate estimate_mu_from_phases(const std::vector<RingObservation>& obs,
                                          const PhysicalConstants& k) {
  if (obs.size() < 3)
    throw domain_error("estimate_mu_from_phases: need at least 3 observations");
  double sgg = 0.0, sgp = 0.0;
  const auto regressor = [&](const RingObservation& o) {
    return -27.0 / 8.0 * k.c * k.c * double(o.n) * double(o.n) * double(o.n) * o.p_tau *
           o.p_tau;
  };
  for (const auto& o : obs) {
    const double g = regressor(o);
    sgg += g * g;
    sgp += g * o.phase;
  }
  if (!(sgg > 0.0)) throw domain_error("estimate_mu_from_phases: degenerate regressors");

  MuEstimate est;
  est.observations = obs.size();
  est.mu = sgp / sgg;
  // heteroscedasticity-robust (sandwich) variance with small-sample correction
  double meat = 0.0;
  for (const auto& o : obs) {
    const double g = regressor(o);
    const double r = o.phase - g * est.mu;
    meat += g * g * r * r;
  }
  const double correction = double(obs.size()) / double(obs.size() - 1);
  est.stddev = std::sqrt(correction * meat) / sgg;
  est.ci95_low = est.mu - 1.96 * est.stddev;
  est.ci95_high = est.mu + 1.96 * est.stddev;
  return est;
}

// ---------------------------------------------------------------------------
// Aiming-point revision advice

enum class AimingAdvice { InTolerance, ReSteer, ReviseMetric };

inline const char* to_string(AimingAdvice a) {
  switch (a) {
    case AimingAdvice::InTolerance: return "in_tolerance";
    case AimingAdvice::ReSteer: return "re_steer";
    default: return "revise_metric";
  }
}

struct AimingCheck {
  AimingAdvice advice = AimingAdvice::InTolerance;
  double max_abs_residual = 0.0;
  double bias = 0.0;
  double noise_floor = 0.0;  // standard error of the mean residual
};

// Residuals inside the budget are fine; excursions with zero-mean noise call
// for re-steering; a persistent bias (> 3x the noise floor) is evidence
// against the metric hypothesis itself.
inline AimingCheck check_aiming_point(const std::vector<double>& residuals,
                                      double delta_budget) {
  if (residuals.empty())
    throw domain_error("check_aiming_point: no residuals supplied");
  if (!(delta_budget > 0.0))
    throw domain_error("check_aiming_point: budget must be positive");

  AimingCheck chk;
  double sum = 0.0;
  for (const double r : residuals) {
    chk.max_abs_residual = std::max(chk.max_abs_residual, std::abs(r));
    sum += r;
  }
  const double mean = sum / double(residuals.size());
  double var = 0.0;
  for (const double r : residuals) var += (r - mean) * (r - mean);
  var = residuals.size() > 1 ? var / double(residuals.size() - 1) : 0.0;
  chk.bias = std::abs(mean);
  chk.noise_floor = std::sqrt(var / double(residuals.size()));

  if (chk.max_abs_residual <= delta_budget) {
    chk.advice = AimingAdvice::InTolerance;
  } else if (chk.bias > 3.0 * chk.noise_floor) {
    chk.advice = AimingAdvice::ReviseMetric;
  } else {
    chk.advice = AimingAdvice::ReSteer;
  }
  return chk;
}

// Residuals of an arrangement's declared channels against their target
// phases, fed to the advice rule with budget (1 - eta)/2.
inline AimingCheck check_aiming_point(const Arrangement& arr, const PhaseTolerance& tol) {
  tol.validate();
  std::vector<double> residuals;
  for (const auto& m : measure_channels(arr)) {
    double target = 0.0;
    for (const auto& ch : arr.channels)
      if (ch.from == m.from && ch.to == m.to) target = ch.target_phase;
    residuals.push_back(m.phase - target);
  }
  return check_aiming_point(residuals, 0.5 * (1.0 - tol.eta));
}

}  // namespace logsync
