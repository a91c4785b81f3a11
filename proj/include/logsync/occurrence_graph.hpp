// Occurrence graphs: event records as nodes, signal propagation and local
// succession as edges.

#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "logsync/machine.hpp"

namespace logsync {

struct OccurrenceGraph {
  enum class EdgeKind { Signal, Succession };

  struct Edge {
    std::size_t from = 0, to = 0;
    EdgeKind kind = EdgeKind::Signal;
  };

  std::vector<EventRecord> nodes;  // deterministic order: (t, machine, kind)
  std::vector<Edge> edges;
};

inline OccurrenceGraph build_occurrence_graph(const EventLog& log) {
  OccurrenceGraph gph;
  gph.nodes = log;
  std::stable_sort(gph.nodes.begin(), gph.nodes.end(),
                   [](const EventRecord& a, const EventRecord& b) {
                     if (a.t != b.t) return a.t < b.t;
                     if (a.machine != b.machine) return a.machine < b.machine;
                     return a.kind == EventKind::Receive && b.kind == EventKind::Transmit;
                   });

  // signal edges: k-th transmit on (from, to) pairs with the k-th receive
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> tx, rx;
  for (std::size_t i = 0; i < gph.nodes.size(); ++i) {
    const auto& ev = gph.nodes[i];
    if (ev.kind == EventKind::Transmit) tx[{ev.machine, ev.counterpart}].push_back(i);
    else rx[{ev.counterpart, ev.machine}].push_back(i);
  }
  for (const auto& [key, txs] : tx) {
    const auto it = rx.find(key);
    if (it == rx.end()) continue;
    const std::size_t n = std::min(txs.size(), it->second.size());
    for (std::size_t i = 0; i < n; ++i)
      gph.edges.push_back({txs[i], it->second[i], OccurrenceGraph::EdgeKind::Signal});
  }

  // succession edges: consecutive records of one machine
  std::map<std::string, std::size_t> last;
  for (std::size_t i = 0; i < gph.nodes.size(); ++i) {
    const auto& id = gph.nodes[i].machine;
    const auto it = last.find(id);
    if (it != last.end())
      gph.edges.push_back({it->second, i, OccurrenceGraph::EdgeKind::Succession});
    last[id] = i;
  }

  std::sort(gph.edges.begin(), gph.edges.end(),
            [](const OccurrenceGraph::Edge& a, const OccurrenceGraph::Edge& b) {
              if (a.from != b.from) return a.from < b.from;
              if (a.to != b.to) return a.to < b.to;
              return a.kind < b.kind;
            });
  return gph;
}

inline OccurrenceGraph export_occurrence_graph(const EventLog& log) {
  return build_occurrence_graph(log);
}

}  // namespace logsync
