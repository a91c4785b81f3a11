// File emitters: event logs as JSON Lines and CSV, channels as CSV,
// adjustments as knot CSV, occurrence graphs as DOT. All output is
// deterministic for identical inputs.

#pragma once

#include <charconv>
#include <sstream>
#include <string>

#include <json.hpp>

#include "logsync/channel.hpp"
#include "logsync/machine.hpp"
#include "logsync/occurrence_graph.hpp"
#include "logsync/piecewise_linear.hpp"

namespace logsync {

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline nlohmann::json to_json(const EventRecord& ev) {
  return nlohmann::json{{"machine", ev.machine}, {"m", ev.reading.m},
                        {"phi", ev.reading.phi}, {"kind", to_string(ev.kind)},
                        {"counterpart", ev.counterpart}, {"t", ev.t}};
}

inline EventRecord event_from_json(const nlohmann::json& j) {
  EventRecord ev;
  ev.machine = j.at("machine").get<std::string>();
  ev.reading.m = j.at("m").get<std::int64_t>();
  ev.reading.phi = j.at("phi").get<double>();
  ev.kind = j.at("kind").get<std::string>() == "transmit" ? EventKind::Transmit
                                                          : EventKind::Receive;
  ev.counterpart = j.at("counterpart").get<std::string>();
  ev.t = j.at("t").get<double>();
  return ev;
}

inline std::string to_jsonl(const EventLog& log) {
  std::string out;
  for (const auto& ev : log) {
    out += to_json(ev).dump();
    out += '\n';
  }
  return out;
}

inline EventLog log_from_jsonl(const std::string& text) {
  EventLog log;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    log.push_back(event_from_json(nlohmann::json::parse(line)));
  }
  return log;
}

inline std::string to_csv(const EventLog& log) {
  std::string out = "machine,m,phi,kind,counterpart,t\n";
  for (const auto& ev : log) {
    out += ev.machine + ',' + std::to_string(ev.reading.m) + ',' +
           format_double(ev.reading.phi) + ',' + to_string(ev.kind) + ',' +
           ev.counterpart + ',' + format_double(ev.t) + '\n';
  }
  return out;
}

inline std::string to_csv(const Channel& ch) {
  std::string out = "m_a,phi_a,m_b,phi_b\n";
  for (const auto& p : ch.pairs) {
    out += std::to_string(p.a.m) + ',' + format_double(p.a.phi) + ',' +
           std::to_string(p.b.m) + ',' + format_double(p.b.phi) + '\n';
  }
  return out;
}

inline std::string knots_to_csv(const PiecewiseLinearMonotone& f) {
  std::string out = "zeta,f_of_zeta\n";
  for (const auto& [x, y] : f.knots())
    out += format_double(x) + ',' + format_double(y) + '\n';
  return out;
}

inline std::string to_dot(const OccurrenceGraph& g) {
  std::string out = "digraph occurrences {\n  rankdir=LR;\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& ev = g.nodes[i];
    out += "  n" + std::to_string(i) + " [label=\"" + ev.machine + " " +
           std::to_string(ev.reading.m) + "." + format_double(ev.reading.phi) + " " +
           to_string(ev.kind) + "\"];\n";
  }
  for (const auto& e : g.edges) {
    out += "  n" + std::to_string(e.from) + " -> n" + std::to_string(e.to);
    if (e.kind == OccurrenceGraph::EdgeKind::Succession) out += " [style=dashed]";
    out += ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace logsync
