// Scenario documents: schema-versioned JSON with explicit unit strings on
// every physical quantity, normalized to SI at load. Validation aggregates
// every problem found; the normalized form is a fixed point of
// validate-then-emit.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "logsync/arrange.hpp"
#include "logsync/machine.hpp"

namespace logsync {

using Json = nlohmann::json;

namespace units {

enum class Dimension {
  Length, Time, Frequency, Speed, Curvature, Mass, Gravitation, GM, Dimensionless
};

struct UnitInfo {
  Dimension dim;
  double to_si;
};

inline const std::map<std::string, UnitInfo>& table() {
  static const std::map<std::string, UnitInfo> t = {
      {"m", {Dimension::Length, 1.0}},
      {"km", {Dimension::Length, 1e3}},
      {"cm", {Dimension::Length, 1e-2}},
      {"mm", {Dimension::Length, 1e-3}},
      {"s", {Dimension::Time, 1.0}},
      {"ms", {Dimension::Time, 1e-3}},
      {"us", {Dimension::Time, 1e-6}},
      {"ns", {Dimension::Time, 1e-9}},
      {"ps", {Dimension::Time, 1e-12}},
      {"Hz", {Dimension::Frequency, 1.0}},
      {"1/s", {Dimension::Frequency, 1.0}},
      {"kHz", {Dimension::Frequency, 1e3}},
      {"MHz", {Dimension::Frequency, 1e6}},
      {"GHz", {Dimension::Frequency, 1e9}},
      {"THz", {Dimension::Frequency, 1e12}},
      {"m/s", {Dimension::Speed, 1.0}},
      {"km/s", {Dimension::Speed, 1e3}},
      {"1/m^2", {Dimension::Curvature, 1.0}},
      {"1/km^2", {Dimension::Curvature, 1e-6}},
      {"kg", {Dimension::Mass, 1.0}},
      {"g", {Dimension::Mass, 1e-3}},
      {"m^3/(kg s^2)", {Dimension::Gravitation, 1.0}},
      {"m^3/s^2", {Dimension::GM, 1.0}},
      {"1", {Dimension::Dimensionless, 1.0}},
      {"cycles", {Dimension::Dimensionless, 1.0}},
      {"bits", {Dimension::Dimensionless, 1.0}},
  };
  return t;
}

inline const char* si_name(Dimension d) {
  switch (d) {
    case Dimension::Length: return "m";
    case Dimension::Time: return "s";
    case Dimension::Frequency: return "Hz";
    case Dimension::Speed: return "m/s";
    case Dimension::Curvature: return "1/m^2";
    case Dimension::Mass: return "kg";
    case Dimension::Gravitation: return "m^3/(kg s^2)";
    case Dimension::GM: return "m^3/s^2";
    default: return "1";
  }
}

}  // namespace units

class ScenarioErrors {
public:
  void add(const std::string& where, const std::string& what) {
    problems_.push_back(where + ": " + what);
  }
  bool empty() const { return problems_.empty(); }
  void raise_if_any() const {
    if (!problems_.empty()) throw validation_error(problems_);
  }
  const std::vector<std::string>& problems() const { return problems_; }

private:
  std::vector<std::string> problems_;
};

namespace detail {

// Reads {"value": x, "unit": u}, converts to SI; scalar or fixed-size array.
inline std::optional<double> read_quantity(const Json& node, units::Dimension dim,
                                           const std::string& where, ScenarioErrors& errs) {
  if (!node.is_object() || !node.contains("value") || !node.contains("unit")) {
    errs.add(where, "expected a quantity object {\"value\": ..., \"unit\": ...}");
    return std::nullopt;
  }
  if (!node["value"].is_number()) {
    errs.add(where, "quantity value must be a number");
    return std::nullopt;
  }
  const auto unit = node["unit"].get<std::string>();
  const auto it = units::table().find(unit);
  if (it == units::table().end()) {
    errs.add(where, "unknown unit '" + unit + "'");
    return std::nullopt;
  }
  if (it->second.dim != dim) {
    errs.add(where, "unit '" + unit + "' has the wrong dimension (expected " +
                        units::si_name(dim) + ")");
    return std::nullopt;
  }
  return node["value"].get<double>() * it->second.to_si;
}

inline std::optional<Vec3> read_position(const Json& node, const std::string& where,
                                         ScenarioErrors& errs) {
  if (!node.is_object() || !node.contains("value") || !node.contains("unit") ||
      !node["value"].is_array() || node["value"].size() != 3) {
    errs.add(where, "expected {\"value\": [x, y, z], \"unit\": \"m\"-like}");
    return std::nullopt;
  }
  const auto unit = node["unit"].get<std::string>();
  const auto it = units::table().find(unit);
  if (it == units::table().end() || it->second.dim != units::Dimension::Length) {
    errs.add(where, "position unit must be a length");
    return std::nullopt;
  }
  Vec3 p;
  for (int i = 0; i < 3; ++i) {
    if (!node["value"][i].is_number()) {
      errs.add(where, "position components must be numbers");
      return std::nullopt;
    }
    p(i) = node["value"][i].get<double>() * it->second.to_si;
  }
  return p;
}

inline Json quantity(double si_value, units::Dimension dim) {
  return Json{{"value", si_value}, {"unit", units::si_name(dim)}};
}

// Normalizes every {"value","unit"} object below `node` to SI, in place.
inline void normalize_params(Json& node, const std::string& where, ScenarioErrors& errs) {
  if (node.is_object()) {
    if (node.size() == 2 && node.contains("value") && node.contains("unit") &&
        node["unit"].is_string()) {
      const auto unit = node["unit"].get<std::string>();
      const auto it = units::table().find(unit);
      if (it == units::table().end()) {
        errs.add(where, "unknown unit '" + unit + "'");
        return;
      }
      if (node["value"].is_number()) {
        node["value"] = node["value"].get<double>() * it->second.to_si;
      } else if (node["value"].is_array()) {
        for (auto& v : node["value"])
          if (v.is_number()) v = v.get<double>() * it->second.to_si;
      }
      node["unit"] = units::si_name(it->second.dim);
      return;
    }
    for (auto& [key, child] : node.items()) normalize_params(child, where + "." + key, errs);
  } else if (node.is_array()) {
    int i = 0;
    for (auto& child : node)
      normalize_params(child, where + "[" + std::to_string(i++) + "]", errs);
  }
}

// Reads a (possibly quantity-wrapped) number out of normalized params.
inline double param_number(const Json& params, const std::string& key, double fallback) {
  if (!params.contains(key)) return fallback;
  const auto& node = params[key];
  if (node.is_number()) return node.get<double>();
  if (node.is_object() && node.contains("value")) return node["value"].get<double>();
  throw validation_error("params." + key + ": expected a number or quantity");
}

inline double require_param(const Json& params, const std::string& key) {
  if (!params.contains(key))
    throw validation_error("params." + key + ": required parameter missing");
  return param_number(params, key, 0.0);
}

}  // namespace detail

struct Scenario {
  int schema_version = 1;
  PhysicalConstants constants;
  Metric metric = Metric::flat(PhysicalConstants::si());
  std::vector<OpenMachine> machines;
  std::vector<DeclaredChannel> channels;
  Json params = Json::object();
  Json normalized = Json::object();  // SI form; fixed point of validate/emit
};

inline Scenario validate_scenario(const Json& doc) {
  ScenarioErrors errs;
  Scenario sc;

  if (!doc.is_object()) {
    errs.add("document", "scenario must be a JSON object");
    errs.raise_if_any();
  }

  // schema version
  if (!doc.contains("schema_version")) {
    errs.add("schema_version", "required field missing");
  } else if (!doc["schema_version"].is_number_integer() ||
             doc["schema_version"].get<int>() != 1) {
    errs.add("schema_version", "unsupported version (this build reads version 1)");
  }

  // constants
  double c = 299792458.0, G = 6.674e-11;
  if (doc.contains("constants")) {
    const auto& k = doc["constants"];
    if (k.contains("c"))
      if (const auto v = detail::read_quantity(k["c"], units::Dimension::Speed,
                                               "constants.c", errs))
        c = *v;
    if (k.contains("G"))
      if (const auto v = detail::read_quantity(k["G"], units::Dimension::Gravitation,
                                               "constants.G", errs))
        G = *v;
  }
  if (!(c > 0.0)) errs.add("constants.c", "must be positive");
  if (!(G > 0.0)) errs.add("constants.G", "must be positive");
  sc.constants = {c, G};

  // metric
  double mu = 0.0;
  std::string kind = "flat";
  if (doc.contains("metric")) {
    const auto& m = doc["metric"];
    kind = m.value("kind", std::string("flat"));
    if (kind != "flat" && kind != "fermi_normal_static") {
      errs.add("metric.kind", "must be 'flat' or 'fermi_normal_static'");
      kind = "flat";
    }
    if (kind == "fermi_normal_static") {
      if (m.contains("mu")) {
        if (const auto v = detail::read_quantity(m["mu"], units::Dimension::Curvature,
                                                 "metric.mu", errs))
          mu = *v;
      } else if (m.contains("mass") && m.contains("radial_coordinate")) {
        const auto mass = detail::read_quantity(m["mass"], units::Dimension::Mass,
                                                "metric.mass", errs);
        const auto r = detail::read_quantity(m["radial_coordinate"], units::Dimension::Length,
                                             "metric.radial_coordinate", errs);
        if (mass && r) {
          if (*r > 0.0 && *mass >= 0.0) mu = mu_from(*mass, *r, sc.constants);
          else errs.add("metric", "mass must be >= 0 and radial_coordinate > 0");
        }
      } else {
        errs.add("metric", "fermi_normal_static needs 'mu' or 'mass' + 'radial_coordinate'");
      }
      if (mu < 0.0) errs.add("metric.mu", "must be non-negative");
    }
  }
  if (errs.empty())
    sc.metric = kind == "flat" ? Metric::flat(sc.constants)
                               : Metric::fermi_normal_static(mu, sc.constants);

  // machines
  struct RawMachine {
    std::string id;
    Vec3 position;
    RateSchedule rate = RateSchedule::constant(1.0);
    std::optional<double> p_tau;
    double offset = 0.0;
  };
  std::vector<RawMachine> raw;
  std::map<std::string, int> seen;
  if (doc.contains("machines")) {
    if (!doc["machines"].is_array()) {
      errs.add("machines", "must be an array");
    } else {
      int idx = 0;
      for (const auto& mj : doc["machines"]) {
        const std::string where = "machines[" + std::to_string(idx++) + "]";
        RawMachine rm;
        rm.id = mj.value("id", std::string());
        if (rm.id.empty()) errs.add(where, "machine id must be non-empty");
        if (seen.count(rm.id)) errs.add(where, "duplicate machine id '" + rm.id + "'");
        seen[rm.id] = 1;
        if (const auto p = detail::read_position(mj.contains("position") ? mj["position"] : Json(),
                                                 where + ".position", errs))
          rm.position = *p;
        if (mj.contains("proper_period")) {
          const auto v = detail::read_quantity(mj["proper_period"], units::Dimension::Time,
                                               where + ".proper_period", errs);
          if (v) {
            if (*v > 0.0) rm.p_tau = *v;
            else errs.add(where + ".proper_period", "must be positive");
          }
        }
        rm.offset = mj.value("clock_offset_cycles", 0.0);
        if (mj.contains("rate")) {
          const auto& rj = mj["rate"];
          const std::string interp = rj.value("interpolation", std::string("constant"));
          std::vector<std::pair<double, double>> knots;
          if (rj.contains("knots") && rj["knots"].is_array()) {
            for (const auto& kj : rj["knots"]) {
              const auto t = detail::read_quantity(kj.contains("time") ? kj["time"] : Json(),
                                                   units::Dimension::Time,
                                                   where + ".rate.knots.time", errs);
              const auto f = detail::read_quantity(
                  kj.contains("frequency") ? kj["frequency"] : Json(),
                  units::Dimension::Frequency, where + ".rate.knots.frequency", errs);
              if (t && f) knots.push_back({*t, *f});
            }
          }
          if (knots.size() == 1) knots.push_back({knots[0].first + 1.0, knots[0].second});
          if (knots.size() >= 2) {
            try {
              rm.rate = interp == "linear" ? RateSchedule::piecewise_linear(knots)
                                           : RateSchedule::piecewise_constant(knots);
            } catch (const validation_error& e) {
              errs.add(where + ".rate", e.what());
            }
          } else {
            errs.add(where + ".rate", "needs at least one knot");
          }
        }
        raw.push_back(std::move(rm));
      }
    }
  }

  // metric validity guard on declared machine positions
  if (errs.empty()) {
    for (const auto& rm : raw)
      if (!sc.metric.in_validity_domain(rm.position))
        errs.add("machines", "machine '" + rm.id +
                                 "' violates the metric validity guard mu*|x|^2 < " +
                                 std::to_string(Metric::kValidityBound));
  }

  // channels
  if (doc.contains("channels")) {
    if (!doc["channels"].is_array()) {
      errs.add("channels", "must be an array");
    } else {
      int idx = 0;
      for (const auto& cj : doc["channels"]) {
        const std::string where = "channels[" + std::to_string(idx++) + "]";
        DeclaredChannel ch;
        ch.from = cj.value("from", std::string());
        ch.to = cj.value("to", std::string());
        ch.target_echo_count = cj.value("target_echo_count", 0.0);
        ch.target_phase = cj.value("target_phase", 0.0);
        if (!seen.count(ch.from))
          errs.add(where, "unknown machine id '" + ch.from + "' in 'from'");
        if (!seen.count(ch.to)) errs.add(where, "unknown machine id '" + ch.to + "' in 'to'");
        if (!(ch.target_echo_count > 0.0))
          errs.add(where, "target_echo_count must be positive");
        sc.channels.push_back(std::move(ch));
      }
      // an arrangement (machines + declared channels) needs an anchored period
      if (!sc.channels.empty()) {
        const bool anchored = std::any_of(raw.begin(), raw.end(),
                                          [](const RawMachine& rm) { return rm.p_tau.has_value(); });
        if (!anchored)
          errs.add("machines",
                   "an arrangement requires at least one machine with an anchored "
                   "proper_period");
      }
    }
  }

  // params: normalize all quantities to SI
  sc.params = doc.value("params", Json::object());
  detail::normalize_params(sc.params, "params", errs);

  errs.raise_if_any();

  // build machines
  for (const auto& rm : raw) {
    const double R = proper_rate(sc.metric, rm.position);
    OpenMachine m{rm.id, Worldline::fixed(rm.position),
                  ClockFunction::from_schedule(rm.rate, R, 0.0, rm.offset), rm.p_tau,
                  std::nullopt};
    sc.machines.push_back(std::move(m));
  }

  // normalized (SI) document
  Json out;
  out["schema_version"] = 1;
  out["constants"] = {{"c", detail::quantity(c, units::Dimension::Speed)},
                      {"G", detail::quantity(G, units::Dimension::Gravitation)}};
  out["metric"] = {{"kind", kind}};
  if (kind == "fermi_normal_static")
    out["metric"]["mu"] = detail::quantity(mu, units::Dimension::Curvature);
  out["machines"] = Json::array();
  for (const auto& rm : raw) {
    Json mj;
    mj["id"] = rm.id;
    mj["position"] = {{"value", {rm.position.x(), rm.position.y(), rm.position.z()}},
                      {"unit", "m"}};
    if (rm.p_tau) mj["proper_period"] = detail::quantity(*rm.p_tau, units::Dimension::Time);
    if (rm.offset != 0.0) mj["clock_offset_cycles"] = rm.offset;
    Json knots = Json::array();
    for (const auto& [t, f] : rm.rate.knots())
      knots.push_back({{"time", detail::quantity(t, units::Dimension::Time)},
                       {"frequency", detail::quantity(f, units::Dimension::Frequency)}});
    mj["rate"] = {{"interpolation", rm.rate.interpolation() == RateSchedule::Interp::Linear
                                        ? "linear"
                                        : "constant"},
                  {"knots", knots}};
    out["machines"].push_back(std::move(mj));
  }
  out["channels"] = Json::array();
  for (const auto& ch : sc.channels)
    out["channels"].push_back({{"from", ch.from},
                               {"to", ch.to},
                               {"target_echo_count", ch.target_echo_count},
                               {"target_phase", ch.target_phase}});
  out["params"] = sc.params;
  sc.normalized = std::move(out);
  return sc;
}

inline Json emit_scenario(const Scenario& sc) { return sc.normalized; }

// Serializes a solver arrangement back into the scenario format.
inline Json arrangement_to_scenario(const Arrangement& arr) {
  Json out;
  out["schema_version"] = 1;
  out["constants"] = {
      {"c", detail::quantity(arr.metric.constants().c, units::Dimension::Speed)},
      {"G", detail::quantity(arr.metric.constants().G, units::Dimension::Gravitation)}};
  out["metric"] = {{"kind", to_string(arr.metric.kind())}};
  if (arr.metric.kind() == MetricKind::FermiNormalStatic)
    out["metric"]["mu"] = detail::quantity(arr.metric.mu(), units::Dimension::Curvature);
  out["machines"] = Json::array();
  for (const auto& m : arr.machines) {
    const Vec3 p = m.worldline.static_position();
    Json mj;
    mj["id"] = m.id;
    mj["position"] = {{"value", {p.x(), p.y(), p.z()}}, {"unit", "m"}};
    if (m.proper_period)
      mj["proper_period"] = detail::quantity(*m.proper_period, units::Dimension::Time);
    const double R = proper_rate(arr.metric, p);
    const double f = 1.0 / (R * arr.coordinate_period);
    mj["rate"] = {{"interpolation", "constant"},
                  {"knots",
                   Json::array({Json{{"time", detail::quantity(0.0, units::Dimension::Time)},
                                     {"frequency", detail::quantity(f, units::Dimension::Frequency)}},
                                Json{{"time", detail::quantity(1.0, units::Dimension::Time)},
                                     {"frequency", detail::quantity(f, units::Dimension::Frequency)}}})}};
    out["machines"].push_back(std::move(mj));
  }
  out["channels"] = Json::array();
  for (const auto& ch : arr.channels)
    out["channels"].push_back({{"from", ch.from},
                               {"to", ch.to},
                               {"target_echo_count", ch.target_echo_count},
                               {"target_phase", ch.target_phase}});
  out["params"] = Json::object();
  return out;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace logsync
