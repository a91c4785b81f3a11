// Command layer: scenario in, deterministic artifacts out. Every command
// writes a manifest (scenario hash, seed, version) beside its outputs so a
// run can be reproduced byte for byte.

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "logsync/exports.hpp"
#include "logsync/minimax.hpp"
#include "logsync/scenario.hpp"
#include "logsync/steer.hpp"
#include "logsync/version.hpp"

namespace logsync {

struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::set<std::string> formats = {"json", "csv", "dot"};
  std::optional<std::string> sweep;  // "param=start:stop:count"
};

struct CommandResult {
  int exit_code = 0;
  Json report;
  std::vector<std::string> artifacts;
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text,
                       CommandResult& res) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw numerical_error("cannot write artifact " + path.string());
  out << text;
  res.artifacts.push_back(path.string());
}

inline void write_json(const std::filesystem::path& path, const Json& j,
                       CommandResult& res) {
  write_text(path, j.dump(2) + "\n", res);
}

inline std::string hash_hex(const Json& j) {
  std::ostringstream os;
  os << std::hex << fnv1a64(j.dump());
  return os.str();
}

inline Json measurement_json(const ChannelMeasurement& m) {
  return Json{{"from", m.from},           {"to", m.to},
              {"nominal_cycles", m.nominal_cycles}, {"phase", m.phase},
              {"delay", m.delay},         {"echo_count", m.echo_count}};
}

inline Json arrangement_report(const Arrangement& arr) {
  Json rep;
  rep["coordinate_period"] = arr.coordinate_period;
  rep["machines"] = Json::array();
  for (const auto& m : arr.machines) {
    const Vec3 p = m.worldline.static_position();
    Json mj{{"id", m.id}, {"position", {p.x(), p.y(), p.z()}}};
    if (m.proper_period) mj["proper_period"] = *m.proper_period;
    rep["machines"].push_back(std::move(mj));
  }
  rep["channels"] = Json::array();
  double worst = 0.0;
  for (const auto& m : measure_channels(arr)) {
    rep["channels"].push_back(measurement_json(m));
    worst = std::max(worst, std::abs(m.phase - 0.0));
  }
  rep["max_abs_phase"] = worst;
  return rep;
}

inline std::vector<Transmission> schedule_from_params(const Json& params) {
  if (!params.contains("schedule") || !params["schedule"].is_array() ||
      params["schedule"].empty())
    throw validation_error("params.schedule: simulate needs a non-empty schedule array");
  std::vector<Transmission> out;
  for (const auto& e : params["schedule"]) {
    Transmission tx;
    tx.from = e.value("from", std::string());
    tx.to = e.value("to", std::string());
    tx.reading = e.value("reading", 0.0);
    tx.echo = e.value("echo", false);
    if (tx.from.empty() || tx.to.empty())
      throw validation_error("params.schedule: entries need 'from' and 'to'");
    out.push_back(std::move(tx));
  }
  return out;
}

}  // namespace detail

inline CommandResult run_command(const std::string& name, const Json& doc,
                                 const std::filesystem::path& out_dir,
                                 const CommandOptions& opts = {});

namespace detail {

inline CommandResult run_simulate(const Scenario& sc, const std::filesystem::path& out,
                                  const CommandOptions& opts) {
  CommandResult res;
  if (sc.machines.size() < 2)
    throw validation_error("simulate: scenario needs at least two machines");
  const auto schedule = schedule_from_params(sc.params);
  const auto log = simulate_signals(sc.machines, sc.metric, schedule);

  write_text(out / "events.jsonl", to_jsonl(log), res);
  if (opts.formats.count("csv")) write_text(out / "events.csv", to_csv(log), res);
  if (opts.formats.count("dot"))
    write_text(out / "occurrence.dot", to_dot(build_occurrence_graph(log)), res);

  Json chans = Json::array();
  for (const auto& ch : sc.channels) {
    const auto channel = channel_from_log(log, ch.from, ch.to);
    if (opts.formats.count("csv"))
      write_text(out / ("channel_" + ch.from + "_" + ch.to + ".csv"), to_csv(channel), res);
    double worst = 0.0;
    for (const auto& p : channel.pairs) worst = std::max(worst, std::abs(p.b.phi));
    Json cj{{"from", ch.from},
            {"to", ch.to},
            {"pairs", channel.pairs.size()},
            {"max_abs_reception_phase", worst}};
    const auto echo = echo_count(log, ch.from, ch.to);
    if (echo) cj["echo_count"] = echo->value;
    chans.push_back(std::move(cj));
  }
  res.report["records"] = log.size();
  res.report["channels"] = std::move(chans);
  return res;
}

inline CommandResult run_solve_tetra(const Scenario& sc, const std::filesystem::path& out,
                                     const CommandOptions&) {
  CommandResult res;
  const auto n = static_cast<std::int64_t>(require_param(sc.params, "n"));
  const double p_tau = require_param(sc.params, "p_tau");
  const auto arr = solve_tetrahedron(sc.metric, p_tau, n);
  res.report = arrangement_report(arr);
  res.report["n"] = n;
  res.report["p_tau"] = p_tau;
  write_json(out / "arrangement.json", arrangement_to_scenario(arr), res);
  return res;
}

inline CommandResult run_solve_ring5(const Scenario& sc, const std::filesystem::path& out,
                                     const CommandOptions&) {
  CommandResult res;
  RingConfig cfg;
  cfg.n = static_cast<std::int64_t>(require_param(sc.params, "n"));
  cfg.p_tau = require_param(sc.params, "p_tau");
  cfg.mu = sc.metric.mu();
  cfg.constants = sc.constants;
  const auto sol = solve_ring5(cfg);
  res.report["n"] = cfg.n;
  res.report["p_tau"] = cfg.p_tau;
  res.report["mu"] = cfg.mu;
  res.report["x_b"] = sol.x_b;
  res.report["ring_radius"] = sol.ring_radius;
  res.report["coordinate_period"] = sol.coordinate_period;
  res.report["measured_phase"] = sol.measured_phase;
  res.report["aa_phases"] = sol.aa_phases;
  res.report["predicted_phase"] = sol.predicted;
  res.report["relative_difference"] =
      sol.predicted != 0.0 ? std::abs(sol.measured_phase - sol.predicted) /
                                 std::abs(sol.predicted)
                           : 0.0;
  res.report["max_null_residual_cycles"] = sol.max_null_residual_cycles;
  write_json(out / "arrangement.json", arrangement_to_scenario(sol.arrangement), res);
  return res;
}

inline CommandResult run_minimax(const Scenario& sc, const std::filesystem::path&,
                                 const CommandOptions& opts) {
  CommandResult res;
  MinimaxConfig cfg;
  cfg.n = static_cast<std::int64_t>(require_param(sc.params, "n"));
  cfg.p_tau = require_param(sc.params, "p_tau");
  cfg.restarts = static_cast<int>(param_number(sc.params, "restarts", cfg.restarts));
  cfg.nm_iterations =
      static_cast<int>(param_number(sc.params, "nm_iterations", cfg.nm_iterations));
  cfg.seed = opts.seed.value_or(
      static_cast<std::uint64_t>(param_number(sc.params, "seed", double(cfg.seed))));

  std::vector<int> ms;
  if (sc.params.contains("m_values")) {
    for (const auto& v : sc.params["m_values"]) ms.push_back(v.get<int>());
  } else {
    ms.push_back(static_cast<int>(require_param(sc.params, "m")));
  }
  Json results = Json::array();
  const Eigen::VectorXd* warm = nullptr;
  std::vector<MinimaxResult> all;
  for (const int m : ms) {
    all.push_back(minimax_phases(sc.metric, cfg, m, warm));
    warm = &all.back().positions;
    results.push_back(Json{{"m", m},
                           {"least_max_phase", all.back().least_max_phase},
                           {"null_set_residual", all.back().feasibility}});
  }
  res.report["results"] = std::move(results);
  res.report["n"] = cfg.n;
  res.report["p_tau"] = cfg.p_tau;
  res.report["seed"] = cfg.seed;
  return res;
}

inline CommandResult run_frozen(const Scenario& sc, const std::filesystem::path&,
                                const CommandOptions&) {
  CommandResult res;
  if (sc.machines.empty() || sc.channels.empty())
    throw validation_error("frozen: scenario needs machines and declared channels");
  Arrangement arr;
  arr.metric = sc.metric;
  arr.machines = sc.machines;
  arr.channels = sc.channels;
  arr.coordinate_period = 1.0;
  for (const auto& m : sc.machines)
    if (m.proper_period) arr.anchors.push_back({m.id, *m.proper_period});
  const auto rep = is_frozen(arr);
  res.report["frozen"] = rep.frozen;
  res.report["degenerate"] = rep.degenerate;
  res.report["witness_machine"] = rep.witness_machine;
  Json coupled = Json::array();
  for (const auto& [from, to] : rep.coupled)
    coupled.push_back(Json{{"from", from}, {"to", to}});
  res.report["coupled_counts"] = std::move(coupled);
  res.report["singular_values"] = rep.singular_values;
  res.report["detail"] = rep.detail;
  return res;
}

inline CommandResult run_bitrate(const Scenario& sc, const std::filesystem::path&,
                                 const CommandOptions&) {
  CommandResult res;
  double GM = 0.0;
  if (sc.params.contains("GM")) {
    GM = param_number(sc.params, "GM", 0.0);
  } else if (sc.params.contains("mass")) {
    GM = sc.constants.G * param_number(sc.params, "mass", 0.0);
  } else {
    throw validation_error("bitrate: params need 'GM' or 'mass'");
  }
  const double L = require_param(sc.params, "separation");
  const double r = require_param(sc.params, "radial_coordinate");
  const double bits = param_number(sc.params, "bits_per_character", 1.0);
  const double p_min = min_period(GM, L, r, sc.constants);
  res.report["GM"] = GM;
  res.report["separation"] = L;
  res.report["radial_coordinate"] = r;
  res.report["bits_per_character"] = bits;
  res.report["min_p_tau"] = p_min;
  if (p_min > 0.0) res.report["max_bitrate_bits_per_s"] = max_bitrate(bits, p_min);
  return res;
}

inline CommandResult run_steer(const Scenario& sc, const std::filesystem::path& out,
                               const CommandOptions& opts) {
  CommandResult res;
  SteerConfig base;
  base.phi0 = param_number(sc.params, "phi0", 0.0);
  base.tolerance.eta = param_number(sc.params, "eta", 0.1);
  base.steps = static_cast<std::int64_t>(param_number(sc.params, "steps", 100000));
  base.record_every =
      static_cast<std::int64_t>(param_number(sc.params, "record_every", 1));
  base.initial_phase = param_number(sc.params, "initial_phase", 0.0);
  base.initial_freq_error = param_number(sc.params, "initial_freq_error", 0.0);
  if (sc.params.contains("drift")) {
    const auto& d = sc.params["drift"];
    base.drift.sigma_white = param_number(d, "sigma_white", 0.0);
    base.drift.sigma_rw = param_number(d, "sigma_rw", 0.0);
    base.drift.seed = static_cast<std::uint64_t>(param_number(d, "seed", 0.0));
  }
  if (opts.seed) base.drift.seed = *opts.seed;
  if (sc.params.contains("controller")) {
    const auto& c = sc.params["controller"];
    base.controller.kp = param_number(c, "kp", 0.0);
    base.controller.ki = param_number(c, "ki", 0.0);
    base.controller.horizon = static_cast<int>(param_number(c, "horizon", 0.0));
  }

  std::vector<int> delays;
  if (sc.params.contains("delays")) {
    for (const auto& v : sc.params["delays"]) delays.push_back(v.get<int>());
  } else {
    delays.push_back(static_cast<int>(param_number(sc.params, "delay", 2)));
  }

  Json runs = Json::array();
  for (const int d : delays) {
    SteerConfig cfg = base;
    cfg.delay_cycles = d;
    const auto r = run_closed_loop(cfg);
    if (opts.formats.count("csv"))
      write_text(out / ("steer_delay" + std::to_string(d) + ".csv"), to_csv(r.series), res);
    runs.push_back(Json{{"delay", d},
                        {"rms_delta", r.rms_delta},
                        {"max_abs_phi", r.max_abs_phi},
                        {"stayed_in_window", r.stayed_in_window},
                        {"sync_lost", r.sync_lost}});
  }
  res.report["runs"] = std::move(runs);
  res.report["eta"] = base.tolerance.eta;
  res.report["steps"] = base.steps;
  res.report["seed"] = base.drift.seed;
  return res;
}

inline CommandResult run_estimate_mu(const Scenario& sc, const std::filesystem::path&,
                                     const CommandOptions&) {
  CommandResult res;
  if (!sc.params.contains("observations") || !sc.params["observations"].is_array())
    throw validation_error("estimate-mu: params.observations array required");
  std::vector<RingObservation> obs;
  for (const auto& o : sc.params["observations"]) {
    RingObservation ro;
    ro.n = static_cast<std::int64_t>(param_number(o, "n", 0));
    ro.p_tau = param_number(o, "p_tau", 0.0);
    ro.phase = param_number(o, "phase", 0.0);
    if (ro.n < 1 || !(ro.p_tau > 0.0))
      throw validation_error("estimate-mu: each observation needs n >= 1 and p_tau > 0");
    obs.push_back(ro);
  }
  const auto est = estimate_mu_from_phases(obs, sc.constants);
  res.report["mu"] = est.mu;
  res.report["stddev"] = est.stddev;
  res.report["ci95"] = {est.ci95_low, est.ci95_high};
  res.report["observations"] = est.observations;
  return res;
}

inline CommandResult run_export_graph(const Scenario& sc, const std::filesystem::path& out,
                                      const CommandOptions&) {
  CommandResult res;
  EventLog log;
  if (sc.params.contains("log") && sc.params["log"].is_array()) {
    for (const auto& e : sc.params["log"]) log.push_back(event_from_json(e));
  } else if (sc.params.contains("log_file")) {
    const std::string path = sc.params["log_file"].get<std::string>();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("export-graph: cannot read log file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    log = log_from_jsonl(buf.str());
  } else {
    throw validation_error("export-graph: params need 'log' (inline) or 'log_file'");
  }
  const auto graph = build_occurrence_graph(log);
  write_text(out / "graph.dot", to_dot(graph), res);
  res.report["nodes"] = graph.nodes.size();
  res.report["edges"] = graph.edges.size();
  return res;
}

inline CommandResult dispatch(const std::string& name, const Scenario& sc,
                              const std::filesystem::path& out, const CommandOptions& opts) {
  if (name == "simulate") return run_simulate(sc, out, opts);
  if (name == "solve-tetra") return run_solve_tetra(sc, out, opts);
  if (name == "solve-ring5") return run_solve_ring5(sc, out, opts);
  if (name == "minimax") return run_minimax(sc, out, opts);
  if (name == "frozen") return run_frozen(sc, out, opts);
  if (name == "bitrate") return run_bitrate(sc, out, opts);
  if (name == "steer") return run_steer(sc, out, opts);
  if (name == "estimate-mu") return run_estimate_mu(sc, out, opts);
  if (name == "export-graph") return run_export_graph(sc, out, opts);
  throw validation_error("unknown command '" + name + "'");
}

struct SweepSpec {
  std::string param;
  double start = 0.0, stop = 0.0;
  int count = 0;
};

inline SweepSpec parse_sweep(const std::string& text) {
  SweepSpec s;
  const auto eq = text.find('=');
  const auto c1 = text.find(':', eq == std::string::npos ? 0 : eq);
  const auto c2 = text.find(':', c1 == std::string::npos ? 0 : c1 + 1);
  if (eq == std::string::npos || c1 == std::string::npos || c2 == std::string::npos)
    throw validation_error("sweep: expected 'param=start:stop:count'");
  s.param = text.substr(0, eq);
  try {
    s.start = std::stod(text.substr(eq + 1, c1 - eq - 1));
    s.stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    s.count = std::stoi(text.substr(c2 + 1));
  } catch (const std::exception&) {
    throw validation_error("sweep: malformed numbers in '" + text + "'");
  }
  if (s.count < 1) throw validation_error("sweep: count must be >= 1");
  return s;
}

}  // namespace detail

inline CommandResult run_command(const std::string& name, const Json& doc,
                                 const std::filesystem::path& out_dir,
                                 const CommandOptions& opts) {
  std::filesystem::create_directories(out_dir);

  if (opts.sweep) {
    const auto spec = detail::parse_sweep(*opts.sweep);
    CommandResult combined;
    Json values = Json::array(), reports = Json::array();
    for (int i = 0; i < spec.count; ++i) {
      const double v = spec.count == 1
                           ? spec.start
                           : spec.start + (spec.stop - spec.start) * i / (spec.count - 1);
      Json varied = doc;
      auto& params = varied["params"];
      if (params.contains(spec.param) && params[spec.param].is_object() &&
          params[spec.param].contains("value")) {
        params[spec.param]["value"] = v;
      } else {
        params[spec.param] = v;
      }
      CommandOptions inner = opts;
      inner.sweep.reset();
      std::ostringstream sub;
      sub << "sweep_" << std::setw(3) << std::setfill('0') << i;
      const auto r = run_command(name, varied, out_dir / sub.str(), inner);
      values.push_back(v);
      reports.push_back(r.report);
      combined.artifacts.insert(combined.artifacts.end(), r.artifacts.begin(),
                                r.artifacts.end());
    }
    combined.report = {{"sweep_param", spec.param}, {"values", values}, {"reports", reports}};
    CommandResult res = combined;
    detail::write_json(out_dir / "sweep_summary.json", combined.report, res);
    return res;
  }

  const Scenario sc = validate_scenario(doc);
  CommandResult res = detail::dispatch(name, sc, out_dir, opts);

  detail::write_json(out_dir / "report.json", res.report, res);
  Json manifest;
  manifest["command"] = name;
  manifest["schema_version"] = sc.schema_version;
  manifest["scenario_hash"] = detail::hash_hex(sc.normalized);
  manifest["seed"] = opts.seed ? Json(*opts.seed) : Json(nullptr);
  manifest["library_version"] = kVersion;
  detail::write_json(out_dir / "manifest.json", manifest, res);
  detail::write_json(out_dir / "scenario_normalized.json", sc.normalized, res);
  return res;
}

}  // namespace logsync
