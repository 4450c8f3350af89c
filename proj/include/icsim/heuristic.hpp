#pragma once

// Deterministic rule-based root-cause analysis. Serves as the reproducible
// stand-in for a language model and as the fallback when a model fails.
// Ties are broken by lexicographic id everywhere.

#include "icsim/actuator.hpp"
#include "icsim/decision.hpp"
#include "icsim/routing.hpp"
#include "icsim/snapshot.hpp"

#include <cmath>
#include <set>
#include <string>

namespace icsim {

struct HeuristicParams {
  double congestion = kCongestionThreshold;  // link utilisation treated as congested
  double hot_pod = 0.8;                      // pod utilisation triggering resizing
  double cold_pod = 0.4;                     // pod utilisation allowing scale-in
  double cpu_step = 0.1;                     // cores
  double mem_step = 100.0;                   // MiB
};

namespace detail {

inline double round6(double x) { return std::round(x * 1e6) / 1e6; }

inline double pod_util(const Snapshot& s, const std::string& pod) {
  auto it = s.monitoring.violation.pods.find(pod);
  return it == s.monitoring.violation.pods.end() ? 0.0 : it->second.cpu_utilization;
}

/// Pod whose relocation changes the given hop; the ingress host is not movable.
inline const PodSpec* pod_for_flow(const Snapshot& s, const FlowId& flow) {
  const auto& app = s.app;
  const auto& ingress = s.topology.ingress_host;
  auto on = [&](const std::string& pod, const std::string& node) {
    auto nodes = s.state.nodes_of(pod);
    return std::find(nodes.begin(), nodes.end(), node) != nodes.end();
  };
  auto movable = [](const PodSpec* p) { return p && !p->pinned_node; };
  for (std::size_t i = 0; i <= app.pods.size(); ++i) {
    const PodSpec* up = i == 0 ? nullptr : &app.pods[i - 1];
    const PodSpec* down = i == app.pods.size() ? nullptr : &app.pods[i];
    bool src_ok = up ? on(up->id, flow.src) : flow.src == ingress;
    bool dst_ok = down ? on(down->id, flow.dst) : flow.dst == ingress;
    if (!src_ok || !dst_ok) continue;
    if (movable(down)) return down;
    if (movable(up)) return up;
  }
  return nullptr;
}

/// Feasible node for moving `pod` whose resulting hops avoid `bad` links, else
/// the max-free-CPU feasible node.
inline std::optional<std::string> relocation_target(const Snapshot& s, const PodSpec& pod,
                                                    const std::set<LinkKey>& bad, const LinkUtilization& util) {
  const auto lim = s.state.limits.at(pod.id);
  const auto count = static_cast<double>(s.state.replicas.at(pod.id).size());
  auto current = s.state.nodes_of(pod.id);
  std::vector<std::string> cands;
  for (const auto& n : feasible_nodes(s.state, s.topology, pod, lim.cpu * count, lim.mem * count))
    if (!(current.size() == 1 && current.front() == n)) cands.push_back(n);
  for (const auto& n : cands) {
    auto r = apply(ServicePlacement{pod.id, n}, s.state, s.topology, s.app, util);
    if (is_rejected(r)) continue;
    const auto& next = std::get<DeploymentState>(r);
    bool clean = true;
    for (const auto& f : derive_flows(next, s.topology, s.app)) {
      auto p = compute_route(s.topology, s.topology.switch_of(f.src), s.topology.switch_of(f.dst), util, bad);
      if (!p) {
        clean = false;
        break;
      }
    }
    if (clean) return n;
  }
  if (!cands.empty()) return cands.front();
  return std::nullopt;
}

inline bool has_headroom(const Snapshot& s, const std::string& pod, double dcpu, double dmem) {
  for (const auto& node : s.state.nodes_of(pod)) {
    int count = 0;
    for (const auto& r : s.state.replicas.at(pod))
      if (r.node_id == node) ++count;
    if (capacity_check(s.state, s.topology, node, dcpu * count, dmem * count) != CapacityVerdict::Ok) return false;
  }
  return true;
}

inline std::optional<Decision> network_rules(const Snapshot& s, const HeuristicParams& p) {
  LinkUtilization util = s.monitoring.violation.links;
  const auto flows = derive_flows(s.state, s.topology, s.app);

  // Down links first, then congestion.
  std::set<LinkKey> down;
  for (const auto& l : s.topology.links)
    if (!l.up) down.insert(key_of(l));
  std::set<LinkKey> hot;
  for (const auto& [k, u] : util)
    if (u >= p.congestion) hot.insert(k);

  for (int pass = 0; pass < 2; ++pass) {
    const auto& bad = pass == 0 ? down : hot;
    if (bad.empty()) continue;
    Decision d;
    d.category = pass == 0 ? SourceCategory::LinkFailure : SourceCategory::LinkCongestion;
    std::set<std::string> moved;
    std::vector<std::string> names;
    for (const auto& f : flows) {
      auto it = s.state.routes.paths.find(f);
      bool affected = it == s.state.routes.paths.end();
      if (!affected)
        for (const auto& k : path_links(it->second))
          if (bad.count(k)) affected = true;
      if (!affected) continue;
      if (it != s.state.routes.paths.end())
        for (const auto& k : path_links(it->second))
          if (bad.count(k)) names.push_back(k.name());
      auto alt = compute_route(s.topology, s.topology.switch_of(f.src), s.topology.switch_of(f.dst), util, bad);
      if (alt && path_max_util(*alt, util) < p.congestion) {
        d.actions.push_back(FlowScheduling{f, *alt});
        continue;
      }
      const PodSpec* pod = pod_for_flow(s, f);
      if (!pod || moved.count(pod->id)) continue;
      if (auto target = relocation_target(s, *pod, bad, util)) {
        d.actions.push_back(ServicePlacement{pod->id, *target});
        moved.insert(pod->id);
      }
    }
    if (d.actions.empty()) continue;
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    d.detail = std::string(pass == 0 ? "failed" : "congested") + " link(s) on application path:";
    for (const auto& n : names) d.detail += " " + n;
    return d;
  }
  return std::nullopt;
}

inline Decision upper_rules(const Snapshot& s, const HeuristicParams& p) {
  if (auto d = network_rules(s, p)) return *d;

  // Hottest pod, ties by id (pods iterate in chain order, compare ids explicitly).
  const PodSpec* hottest = nullptr;
  double best = -1.0;
  for (const auto& pod : s.app.pods) {
    double u = pod_util(s, pod.id);
    if (u > best || (u == best && hottest && pod.id < hottest->id)) {
      best = u;
      hottest = &pod;
    }
  }
  Decision d;
  d.category = SourceCategory::CpuShortage;
  if (!hottest) return d;
  const auto lim = s.state.limits.at(hottest->id);
  const int reps = static_cast<int>(s.state.replicas.at(hottest->id).size());
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s at %.2f of its CPU limit", hottest->id.c_str(), best);
  d.detail = buf;
  const bool can_grow = reps < s.state.max_replicas &&
                        !feasible_nodes(s.state, s.topology, *hottest, lim.cpu, lim.mem).empty();
  const bool headroom = has_headroom(s, hottest->id, p.cpu_step, p.mem_step);
  VerticalScaling up{hottest->id, round6(lim.cpu + p.cpu_step), round6(lim.mem + p.mem_step)};

  if (best >= p.hot_pod) {
    if (headroom) d.actions.push_back(up);
    else if (can_grow) d.actions.push_back(HorizontalScaling{hottest->id, reps + 1});
    else {
      const auto count = static_cast<double>(reps);
      auto nodes = feasible_nodes(s.state, s.topology, *hottest, lim.cpu * count, lim.mem * count);
      if (!nodes.empty()) d.actions.push_back(ServicePlacement{hottest->id, nodes.front()});
    }
    return d;
  }
  // No saturated resource: queueing on the busiest stage.
  if (can_grow) {
    d.actions.push_back(HorizontalScaling{hottest->id, reps + 1});
    return d;
  }
  if (headroom) d.actions.push_back(up);
  else d.category = SourceCategory::Other;
  return d;
}

inline Decision lower_rules(const Snapshot& s, const HeuristicParams& p) {
  Decision d;
  d.category = SourceCategory::OverProvisioning;
  auto coldest = [&](auto&& pred) -> const PodSpec* {
    const PodSpec* pick = nullptr;
    double best = 0.0;
    for (const auto& pod : s.app.pods) {
      if (!pred(pod)) continue;
      double u = pod_util(s, pod.id);
      if (!pick || u < best || (u == best && pod.id < pick->id)) {
        pick = &pod;
        best = u;
      }
    }
    return pick;
  };
  const PodSpec* multi = coldest([&](const PodSpec& pod) { return s.state.replicas.at(pod.id).size() > 1; });
  if (multi && pod_util(s, multi->id) < p.cold_pod) {
    int reps = static_cast<int>(s.state.replicas.at(multi->id).size());
    d.detail = multi->id + " has idle replicas";
    d.actions.push_back(HorizontalScaling{multi->id, reps - 1});
    return d;
  }
  const PodSpec* shrink = coldest([&](const PodSpec& pod) {
    return s.state.limits.at(pod.id).cpu > s.state.cpu_floor + 1e-9;
  });
  if (!shrink) {
    d.detail = "all pods already at their floors";
    return d;
  }
  const auto lim = s.state.limits.at(shrink->id);
  d.detail = shrink->id + " is over-allocated";
  d.actions.push_back(VerticalScaling{shrink->id, round6(std::max(s.state.cpu_floor, lim.cpu - p.cpu_step)),
                                      round6(std::max(shrink->mem_limit, lim.mem - p.mem_step))});
  return d;
}

}  // namespace detail

inline Decision heuristic_decide(const Snapshot& snapshot, const Violation& violation, const HeuristicParams& p = {}) {
  return violation.direction == Direction::Upper ? detail::upper_rules(snapshot, p) : detail::lower_rules(snapshot, p);
}

}  // namespace icsim
