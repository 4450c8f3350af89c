#pragma once

// Orchestrator and SDN-controller side effects: validates a corrective action
// against the current deployment and produces the next deployment state.
// Rejected actions leave the input untouched.

#include "icsim/continuum.hpp"
#include "icsim/decision.hpp"
#include "icsim/routing.hpp"

#include <cmath>
#include <string>
#include <variant>

namespace icsim {

enum class RejectReason { InsufficientCapacity, UnknownId, InvalidPath, ReplicaBounds, InvalidLimits, Pinned };

inline const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::InsufficientCapacity: return "insufficient_capacity";
    case RejectReason::UnknownId: return "unknown_id";
    case RejectReason::InvalidPath: return "invalid_path";
    case RejectReason::ReplicaBounds: return "replica_bounds";
    case RejectReason::InvalidLimits: return "invalid_limits";
    case RejectReason::Pinned: return "pinned";
  }
  return "?";
}

struct Rejection {
  RejectReason reason;
  std::string detail;
};

using ApplyResult = std::variant<DeploymentState, Rejection>;

inline bool is_rejected(const ApplyResult& r) { return std::holds_alternative<Rejection>(r); }

/// Schedulable nodes able to take (cpu, mem) more, ordered by free CPU
/// descending then id. Pinned pods only ever see their pinned node.
inline std::vector<std::string> feasible_nodes(const DeploymentState& state, const Topology& topo, const PodSpec& pod,
                                               double cpu, double mem) {
  std::vector<std::pair<double, std::string>> cands;
  for (const auto& n : topo.nodes) {
    if (pod.pinned_node) {
      if (n.id != *pod.pinned_node) continue;
    } else if (!n.schedulable) {
      continue;
    }
    if (capacity_check(state, topo, n.id, cpu, mem) != CapacityVerdict::Ok) continue;
    cands.emplace_back(free_cpu(state, topo, n.id), n.id);
  }
  std::sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<std::string> out;
  for (auto& [_, id] : cands) out.push_back(std::move(id));
  return out;
}

namespace detail {

struct ApplyVisitor {
  const DeploymentState& in;
  const Topology& topo;
  const Application& app;
  const LinkUtilization& util;

  ApplyResult reroute(DeploymentState s) const {
    s.routes = recompute_all_routes(s, topo, app, util);
    return s;
  }

  ApplyResult operator()(const ServicePlacement& a) const {
    const PodSpec* pod = app.find(a.pod);
    const Node* node = topo.find_node(a.target_node);
    if (!pod || !node || !in.replicas.count(a.pod)) return Rejection{RejectReason::UnknownId, a.pod + " -> " + a.target_node};
    if (pod->pinned_node && *pod->pinned_node != a.target_node)
      return Rejection{RejectReason::Pinned, a.pod + " is pinned to " + *pod->pinned_node};
    if (!node->schedulable && !(pod->pinned_node && *pod->pinned_node == a.target_node))
      return Rejection{RejectReason::InsufficientCapacity, a.target_node + " is not schedulable"};

    DeploymentState s = in;
    auto& reps = s.replicas.at(a.pod);
    bool all_there = std::all_of(reps.begin(), reps.end(), [&](const Replica& r) { return r.node_id == a.target_node; });
    if (all_there) return s;
    const auto lim = s.limits.at(a.pod);
    int moving = 0;
    for (const auto& r : reps)
      if (r.node_id != a.target_node) ++moving;
    if (capacity_check(s, topo, a.target_node, lim.cpu * moving, lim.mem * moving) != CapacityVerdict::Ok)
      return Rejection{RejectReason::InsufficientCapacity, a.target_node};
    for (auto& r : reps) r.node_id = a.target_node;
    return reroute(std::move(s));
  }

  ApplyResult operator()(const HorizontalScaling& a) const {
    const PodSpec* pod = app.find(a.pod);
    if (!pod || !in.replicas.count(a.pod)) return Rejection{RejectReason::UnknownId, a.pod};
    if (a.replicas < 1 || a.replicas > in.max_replicas)
      return Rejection{RejectReason::ReplicaBounds, std::to_string(a.replicas)};
    DeploymentState s = in;
    auto& reps = s.replicas.at(a.pod);
    const int cur = static_cast<int>(reps.size());
    if (a.replicas == cur) return s;
    const auto lim = s.limits.at(a.pod);
    if (a.replicas > cur) {
      for (int i = cur; i < a.replicas; ++i) {
        auto nodes = feasible_nodes(s, topo, *pod, lim.cpu, lim.mem);
        if (nodes.empty()) return Rejection{RejectReason::InsufficientCapacity, "no node fits another " + a.pod};
        auto id = s.next_replica_id(a.pod);
        s.replicas.at(a.pod).push_back({id, nodes.front()});
      }
    } else {
      // newest first
      reps.resize(static_cast<std::size_t>(a.replicas));
    }
    return reroute(std::move(s));
  }

  ApplyResult operator()(const VerticalScaling& a) const {
    if (!app.find(a.pod) || !in.replicas.count(a.pod)) return Rejection{RejectReason::UnknownId, a.pod};
    if (!(a.cpu_limit >= in.cpu_floor - kCapacityEps) || !(a.mem_limit > 0.0))
      return Rejection{RejectReason::InvalidLimits, a.pod};
    DeploymentState s = in;
    const auto old = s.limits.at(a.pod);
    const double dcpu = a.cpu_limit - old.cpu;
    const double dmem = a.mem_limit - old.mem;
    for (const auto& node : s.nodes_of(a.pod)) {
      int count = 0;
      for (const auto& r : s.replicas.at(a.pod))
        if (r.node_id == node) ++count;
      if (capacity_check(s, topo, node, std::max(0.0, dcpu) * count, std::max(0.0, dmem) * count) != CapacityVerdict::Ok)
        return Rejection{RejectReason::InsufficientCapacity, node};
    }
    s.limits[a.pod] = {a.cpu_limit, a.mem_limit};
    return s;
  }

  ApplyResult operator()(const FlowScheduling& a) const {
    if (!topo.find_node(a.flow.src) || !topo.find_node(a.flow.dst))
      return Rejection{RejectReason::UnknownId, a.flow.src + "->" + a.flow.dst};
    auto flows = derive_flows(in, topo, app);
    if (std::find(flows.begin(), flows.end(), a.flow) == flows.end())
      return Rejection{RejectReason::UnknownId, "no application flow " + a.flow.src + "->" + a.flow.dst};
    if (auto err = check_route(topo, a.flow, a.path)) return Rejection{RejectReason::InvalidPath, *err};
    DeploymentState s = in;
    auto& slot = s.routes.paths[a.flow];
    if (slot != a.path) {
      slot = a.path;
      ++s.routes.version;
    }
    return s;
  }
};

}  // namespace detail

inline ApplyResult apply(const Action& action, const DeploymentState& state, const Topology& topo,
                         const Application& app, const LinkUtilization& util = {}) {
  return std::visit(detail::ApplyVisitor{state, topo, app, util}, action);
}

}  // namespace icsim
