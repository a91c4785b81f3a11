// Least possible maximum phase amplitude over five machines with all ten
// two-way channels declared, when only m designated channels may carry a
// non-null phase.
//
// Decision variables are the machine positions (the per-machine rates are
// pinned by the common coordinate period anchored at B1). The designated
// free sets are nested in m, so the true minima are non-increasing; the
// optimizer preserves that by sharing restart seeds across m and warm
// starting each m from the previous optimum. Nelder-Mead works on a cheap
// first-order chord quadrature of the light times; the returned values are
// re-measured with the full null-path solver after a Gauss-Newton polish of
// the null constraints.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "logsync/arrange.hpp"
#include "logsync/nelder_mead.hpp"

namespace logsync {

struct MinimaxConfig {
  std::int64_t n = 1;
  double p_tau = 1.0;
  int restarts = 3;
  std::uint64_t seed = 20240901;
  int nm_iterations = 2500;
  double feasibility_tolerance = 1e-7;  // max |phase| allowed on the null set
};

struct MinimaxResult {
  int m = 0;
  double least_max_phase = 0.0;  // over the m designated channels
  double feasibility = 0.0;      // worst |phase| on the other 10 - m
  Eigen::VectorXd positions;     // 15 coordinates, machine order B1 B2 A0 A1 A2
};

namespace detail {

// Machine order B1 B2 A0 A1 A2; free sets grow along this edge order, so the
// first three (the A ring) reproduce the symmetric ring construction at m=3.
struct MinimaxEdge {
  int i, j;
  double nominal;  // one-way cycle count
};

inline std::array<MinimaxEdge, 10> minimax_edges(std::int64_t n) {
  const double two = 2.0 * double(n), three = 3.0 * double(n);
  return {{{2, 3, three},
           {3, 4, three},
           {4, 2, three},
           {0, 1, two},
           {0, 2, two},
           {1, 2, two},
           {0, 3, two},
           {1, 3, two},
           {0, 4, two},
           {1, 4, two}}};
}

// First-order light time: composite Simpson along the straight chord.
inline double chord_delay(const Metric& g, const Vec3& a, const Vec3& b, int panels = 8) {
  if (g.is_flat()) return (b - a).norm() / g.constants().c;
  const Vec3 d = b - a;
  const auto f = [&](double t) {
    const Vec3 p = a + t * d;
    return std::sqrt(d.dot(optical_metric(g, p) * d));
  };
  const double h = 1.0 / panels;
  double acc = f(0.0) + f(1.0);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return acc * h / 3.0 / g.constants().c;
}

}  // namespace detail

inline MinimaxResult minimax_phases(const Metric& metric, const MinimaxConfig& cfg, int m,
                                    const Eigen::VectorXd* warm_start = nullptr) {
  if (m < 1 || m > 10)
    throw validation_error("minimax_phases: m must lie in 1..10");
  if (cfg.n < 1 || !(cfg.p_tau > 0.0))
    throw validation_error("minimax_phases: n must be >= 1 and p_tau positive");

  const double c = metric.constants().c;
  const double scale = double(cfg.n) * cfg.p_tau * c;
  const auto edges = detail::minimax_edges(cfg.n);

  // flat ring template: B at (+-npc, 0, 0), A ring of radius sqrt(3) npc
  Eigen::VectorXd tmpl(15);
  {
    const double rho = std::sqrt(3.0) * scale;
    tmpl.segment<3>(0) = Vec3{scale, 0, 0};
    tmpl.segment<3>(3) = Vec3{-scale, 0, 0};
    for (int k = 0; k < 3; ++k) {
      const double th = 2.0 * M_PI * k / 3.0;
      tmpl.segment<3>(6 + 3 * k) = Vec3{0.0, rho * std::cos(th), rho * std::sin(th)};
    }
  }
  for (int k = 0; k < 5; ++k)
    metric.require_valid(tmpl.segment<3>(3 * k), "minimax_phases");

  const auto phases = [&](const Eigen::VectorXd& q, bool precise) {
    std::array<double, 10> out{};
    const Vec3 b1 = q.segment<3>(0);
    if (!metric.in_validity_domain(b1)) return std::array<double, 10>{1e9};
    const double T = cfg.p_tau / std::sqrt(metric.lapse2(b1));
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Vec3 pi = q.segment<3>(3 * edges[e].i);
      const Vec3 pj = q.segment<3>(3 * edges[e].j);
      if (!metric.in_validity_domain(pi) || !metric.in_validity_domain(pj) ||
          (pi - pj).norm() < 1e-9 * scale)
        return std::array<double, 10>{1e9};
      const double delay = precise ? coordinate_light_delay(metric, pi, pj)
                                   : detail::chord_delay(metric, pi, pj);
      out[e] = wrap_phase(delay / T - edges[e].nominal);
    }
    return out;
  };

  const auto objective = [&](const Eigen::VectorXd& q) {
    const auto ph = phases(q, false);
    if (ph[0] >= 1e9) return 1e12;
    double null_max = 0.0, free_max = 0.0;
    for (int e = 0; e < 10; ++e)
      (e < m ? free_max : null_max) = std::max(e < m ? free_max : null_max, std::abs(ph[e]));
    return 1e3 * null_max + free_max;
  };

  // Gauss-Newton projection onto the null constraints with the full solver.
  const auto polish = [&](Eigen::VectorXd q) {
    if (m == 10) return q;
    const int rows = 10 - m;
    for (int it = 0; it < 12; ++it) {
      const auto ph = phases(q, true);
      Eigen::VectorXd r(rows);
      for (int e = m; e < 10; ++e) r(e - m) = ph[e];
      if (r.lpNorm<Eigen::Infinity>() < 1e-11) break;
      Eigen::MatrixXd J(rows, 15);
      const double h = 1e-7 * scale;
      for (int col = 0; col < 15; ++col) {
        Eigen::VectorXd qp = q;
        qp(col) += h;
        const auto php = phases(qp, true);
        if (php[0] >= 1e9) {
          J.col(col).setZero();
          continue;
        }
        for (int e = m; e < 10; ++e) J(e - m, col) = (php[e] - ph[e]) / h;
      }
      const Eigen::VectorXd step =
          J.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(r);
      if (!step.allFinite()) break;
      q -= step;
    }
    return q;
  };

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> jitter(0.0, 0.01 * scale);

  MinimaxResult best;
  best.m = m;
  best.least_max_phase = std::numeric_limits<double>::infinity();
  best.feasibility = std::numeric_limits<double>::infinity();

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(tmpl);
  if (!metric.is_flat()) {
    // symmetric ring seed: the seven B channels nulled exactly, so the start
    // is feasible whenever the free set contains the A ring
    auto residual = [&](const Eigen::VectorXd& p) {
      const Vec3 b1{p(0), 0, 0};
      const double T = cfg.p_tau / std::sqrt(metric.lapse2(b1));
      const double target = 2.0 * double(cfg.n) * T;
      Eigen::VectorXd r(2);
      r(0) = detail::chord_delay(metric, b1, {-p(0), 0, 0}) - target;
      r(1) = detail::chord_delay(metric, b1, {0.0, p(1), 0.0}) - target;
      return r;
    };
    Eigen::VectorXd p0(2);
    p0 << scale, std::sqrt(3.0) * scale;
    NewtonOptions opts;
    opts.tolerance = 1e-13 * scale / c;
    opts.fd_step = 1e-7 * scale;
    const Eigen::VectorXd p = newton_solve(residual, p0, opts, "minimax_phases(seed)");
    Eigen::VectorXd ring = tmpl;
    ring.segment<3>(0) = Vec3{p(0), 0, 0};
    ring.segment<3>(3) = Vec3{-p(0), 0, 0};
    for (int kk = 0; kk < 3; ++kk) {
      const double th = 2.0 * M_PI * kk / 3.0;
      ring.segment<3>(6 + 3 * kk) = Vec3{0.0, p(1) * std::cos(th), p(1) * std::sin(th)};
    }
    starts.push_back(ring);
  }
  if (warm_start && warm_start->size() == 15) starts.push_back(*warm_start);
  for (int r = 0; r < cfg.restarts; ++r) {
    Eigen::VectorXd q = tmpl;
    for (int i = 0; i < 15; ++i) q(i) += jitter(rng);
    starts.push_back(q);
  }

  NelderMeadOptions nm_opts;
  nm_opts.max_iterations = cfg.nm_iterations;
  nm_opts.f_tolerance = 1e-14;
  nm_opts.x_tolerance = 1e-12 * scale;

  for (const auto& start : starts) {
    const auto nm = nelder_mead(objective, start, 0.02 * scale, nm_opts);
    const Eigen::VectorXd q = polish(nm.x);
    const auto ph = phases(q, true);
    if (ph[0] >= 1e9) continue;
    double null_max = 0.0, free_max = 0.0;
    for (int e = 0; e < 10; ++e)
      (e < m ? free_max : null_max) = std::max(e < m ? free_max : null_max, std::abs(ph[e]));
    const bool better = null_max <= cfg.feasibility_tolerance &&
                        (best.feasibility > cfg.feasibility_tolerance ||
                         free_max < best.least_max_phase);
    const bool fallback =
        best.feasibility > cfg.feasibility_tolerance && null_max < best.feasibility;
    if (better || fallback) {
      best.least_max_phase = free_max;
      best.feasibility = null_max;
      best.positions = q;
    }
  }

  if (best.feasibility > cfg.feasibility_tolerance) {
    std::ostringstream msg;
    msg << "minimax_phases: no feasible configuration found for m=" << m
        << " (best null-set residual " << best.feasibility << ")";
    throw numerical_error(msg.str());
  }
  return best;
}

// The whole sweep m = 1..10 with shared seeds and warm starts.
inline std::vector<MinimaxResult> minimax_sweep(const Metric& metric,
                                                const MinimaxConfig& cfg) {
  std::vector<MinimaxResult> out;
  const Eigen::VectorXd* warm = nullptr;
  for (int m = 1; m <= 10; ++m) {
    out.push_back(minimax_phases(metric, cfg, m, warm));
    warm = &out.back().positions;
  }
  return out;
}

}  // namespace logsync
