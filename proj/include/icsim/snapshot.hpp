#pragma once

// Point-in-time view handed to decision makers: cluster, network and
// monitoring data plus the intent and the violation being handled.

#include "icsim/canonical_json.hpp"
#include "icsim/continuum.hpp"
#include "icsim/intent.hpp"
#include "icsim/telemetry.hpp"

#include <string>

namespace icsim {

struct Snapshot {
  Topology topology;
  Application app;
  DeploymentState state;
  WindowSet monitoring;
  double window_len = 10.0;
  double ema_rt = 0.0;
  IntentSpec intent;
  Violation violation;
};

inline json cluster_info_json(const Snapshot& s) {
  json nodes = json::array();
  for (const auto& n : s.topology.nodes) {
    auto [cpu, mem] = s.state.node_usage(n.id);
    nodes.push_back({{"id", n.id},
                     {"cpu_capacity", n.cpu_capacity},
                     {"mem_capacity", n.mem_capacity},
                     {"cpu_allocated", cpu},
                     {"mem_allocated", mem},
                     {"schedulable", n.schedulable}});
  }
  json pods = json::array();
  for (const auto& p : s.app.pods) {
    json reps = json::array();
    if (auto it = s.state.replicas.find(p.id); it != s.state.replicas.end())
      for (const auto& r : it->second) reps.push_back({{"id", r.replica_id}, {"node", r.node_id}});
    const auto lim = s.state.limits.count(p.id) ? s.state.limits.at(p.id) : Limits{p.cpu_limit, p.mem_limit};
    json pod{{"id", p.id}, {"chain_index", p.chain_index}, {"cpu_limit", lim.cpu},
             {"mem_limit", lim.mem}, {"replicas", reps}};
    if (p.pinned_node) pod["pinned_node"] = *p.pinned_node;
    pods.push_back(std::move(pod));
  }
  return {{"nodes", nodes}, {"pods", pods}, {"max_replicas", s.state.max_replicas}, {"cpu_floor", s.state.cpu_floor}};
}

inline json network_info_json(const Snapshot& s) {
  json hosts = json::array();
  for (const auto& n : s.topology.nodes) hosts.push_back({{"id", n.id}, {"switch", n.attached_switch}});
  json links = json::array();
  for (const auto& l : s.topology.links) {
    LinkKey k = key_of(l);
    links.push_back({{"a", k.lo}, {"b", k.hi}, {"capacity_mbps", l.capacity}, {"latency_ms", l.latency}, {"up", l.up}});
  }
  json flows = json::array();
  for (const auto& f : derive_flows(s.state, s.topology, s.app)) {
    json e{{"src", f.src}, {"dst", f.dst}};
    auto it = s.state.routes.paths.find(f);
    e["path"] = it == s.state.routes.paths.end() ? json::array() : json(it->second);
    flows.push_back(std::move(e));
  }
  return {{"ingress_host", s.topology.ingress_host},
          {"switches", s.topology.switches},
          {"hosts", hosts},
          {"links", links},
          {"flows", flows}};
}

inline json monitoring_data_json(const Snapshot& s) {
  json pre = json::array();
  for (const auto& w : s.monitoring.pre) pre.push_back(to_json(w));
  return {{"pre_violation", pre},
          {"violation_window", to_json(s.monitoring.violation)},
          {"short_history", s.monitoring.short_history},
          {"window_len", s.window_len},
          {"ema_rt", s.ema_rt}};
}

inline json intent_json(const IntentSpec& i) {
  return {{"metric", "response_time_ema"},
          {"upper_threshold", i.upper_threshold},
          {"lower_threshold", i.lower_threshold},
          {"waiting_time", i.waiting_time}};
}

inline json violation_json(const Violation& v) {
  return {{"direction", to_string(v.direction)}, {"time", v.time}, {"ema_rt", v.ema_rt}, {"index", v.index}};
}

inline json to_json(const Snapshot& s) {
  return {{"cluster_info", cluster_info_json(s)},
          {"network_info", network_info_json(s)},
          {"monitoring_data", monitoring_data_json(s)},
          {"intent", intent_json(s.intent)},
          {"violation", violation_json(s.violation)}};
}

/// Stable text form: sorted keys, 6 significant digits.
inline std::string serialize(const Snapshot& s) { return dump_canonical(to_json(s)); }

}  // namespace icsim
