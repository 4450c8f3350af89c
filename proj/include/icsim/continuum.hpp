#pragma once

// Typed model of the continuum substrate (hosts, switches, links) and of the
// deployed microservice chain (pods, replicas, limits, routes).

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace icsim {

inline constexpr double kCapacityEps = 1e-9;
inline constexpr double kDefaultCpuFloor = 0.2;
inline constexpr int kDefaultMaxReplicas = 5;

struct Node {
  std::string id;
  double cpu_capacity = 0.0;  // cores
  double mem_capacity = 0.0;  // MiB
  std::string attached_switch;
  bool schedulable = true;  // control-plane hosts can be tainted
};

struct Link {
  std::string a;
  std::string b;
  double capacity = 0.0;  // Mb/s
  double latency = 0.0;   // ms
  bool up = true;
};

/// Undirected link identity, endpoints stored in lexicographic order.
struct LinkKey {
  std::string lo;
  std::string hi;

  LinkKey() = default;
  LinkKey(std::string a, std::string b) : lo(std::move(a)), hi(std::move(b)) {
    if (hi < lo) std::swap(lo, hi);
  }
  auto operator<=>(const LinkKey&) const = default;
  bool operator==(const LinkKey&) const = default;

  std::string name() const { return lo + "-" + hi; }
};

inline LinkKey key_of(const Link& l) { return {l.a, l.b}; }

struct Topology {
  std::vector<Node> nodes;
  std::vector<std::string> switches;
  std::vector<Link> links;
  std::string ingress_host;

  const Node* find_node(const std::string& id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }
  const Link* find_link(const LinkKey& k) const {
    for (const auto& l : links)
      if (key_of(l) == k) return &l;
    return nullptr;
  }
  Link* find_link(const LinkKey& k) {
    for (auto& l : links)
      if (key_of(l) == k) return &l;
    return nullptr;
  }
  bool has_switch(const std::string& s) const {
    return std::find(switches.begin(), switches.end(), s) != switches.end();
  }
  const std::string& switch_of(const std::string& host) const {
    const Node* n = find_node(host);
    if (!n) throw std::out_of_range("unknown host '" + host + "'");
    return n->attached_switch;
  }

  /// Adjacency over up links, neighbours sorted lexicographically.
  std::map<std::string, std::vector<std::string>> up_adjacency() const {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& s : switches) adj[s];
    for (const auto& l : links) {
      if (!l.up) continue;
      adj[l.a].push_back(l.b);
      adj[l.b].push_back(l.a);
    }
    for (auto& [_, v] : adj) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return adj;
  }
};

struct TopologyIssue {
  std::string code;  // machine-readable, e.g. "duplicate-link"
  std::string detail;
};

/// Reports every structural breach; an empty result means the topology is valid.
inline std::vector<TopologyIssue> validate_topology(const Topology& t) {
  std::vector<TopologyIssue> out;
  std::set<std::string> sw;
  for (const auto& s : t.switches) {
    if (!sw.insert(s).second) out.push_back({"duplicate-switch", s});
  }
  std::set<std::string> node_ids;
  for (const auto& n : t.nodes) {
    if (!node_ids.insert(n.id).second) out.push_back({"duplicate-node", n.id});
    if (!sw.count(n.attached_switch))
      out.push_back({"unknown-switch", n.id + " attached to " + n.attached_switch});
    if (!(n.cpu_capacity > 0.0) || !(n.mem_capacity > 0.0))
      out.push_back({"non-positive-capacity", n.id});
  }
  std::set<LinkKey> seen;
  for (const auto& l : t.links) {
    LinkKey k = key_of(l);
    if (l.a == l.b) out.push_back({"self-loop", k.name()});
    if (!seen.insert(k).second) out.push_back({"duplicate-link", k.name()});
    if (!sw.count(l.a) || !sw.count(l.b)) out.push_back({"unknown-switch", "link " + k.name()});
    if (!(l.capacity > 0.0)) out.push_back({"non-positive-capacity", "link " + k.name()});
  }
  if (t.ingress_host.empty() || !node_ids.count(t.ingress_host))
    out.push_back({"unknown-ingress", t.ingress_host});

  if (!t.switches.empty()) {
    auto adj = t.up_adjacency();
    std::set<std::string> reached{t.switches.front()};
    std::queue<std::string> q;
    q.push(t.switches.front());
    while (!q.empty()) {
      auto cur = q.front();
      q.pop();
      for (const auto& n : adj[cur])
        if (reached.insert(n).second) q.push(n);
    }
    for (const auto& s : sw)
      if (!reached.count(s)) out.push_back({"disconnected", s});
  }
  return out;
}

struct PodSpec {
  std::string id;
  int chain_index = 0;
  double cpu_limit = 0.0;    // cores per replica
  double mem_limit = 0.0;    // MiB per replica
  double work_demand = 0.0;  // core-seconds per request
  std::optional<std::string> pinned_node;
  // Fraction of the limit actually burnt while serving (the remainder is
  // blocking I/O). Only affects reported utilisation, never service time.
  double cpu_intensity = 1.0;
};

/// The microservice chain, ordered by chain_index.
struct Application {
  std::vector<PodSpec> pods;

  const PodSpec* find(const std::string& id) const {
    for (const auto& p : pods)
      if (p.id == id) return &p;
    return nullptr;
  }
  void sort_chain() {
    std::sort(pods.begin(), pods.end(),
              [](const PodSpec& x, const PodSpec& y) { return x.chain_index < y.chain_index; });
  }
};

struct Replica {
  std::string replica_id;
  std::string node_id;
  bool operator==(const Replica&) const = default;
};

struct Limits {
  double cpu = 0.0;
  double mem = 0.0;
  bool operator==(const Limits&) const = default;
};

/// Host-pair flow; routing works on host attachments, not individual pods.
struct FlowId {
  std::string src;
  std::string dst;
  auto operator<=>(const FlowId&) const = default;
  bool operator==(const FlowId&) const = default;
};

using Path = std::vector<std::string>;

struct RouteTable {
  std::map<FlowId, Path> paths;
  std::uint64_t version = 0;
  bool operator==(const RouteTable&) const = default;
};

struct DeploymentState {
  std::map<std::string, std::vector<Replica>> replicas;
  std::map<std::string, Limits> limits;
  RouteTable routes;
  std::map<std::string, int> replica_serial;  // per-pod id counter
  int max_replicas = kDefaultMaxReplicas;
  double cpu_floor = kDefaultCpuFloor;

  bool operator==(const DeploymentState&) const = default;

  std::string next_replica_id(const std::string& pod) {
    int n = replica_serial[pod]++;
    return pod + "-" + std::to_string(n);
  }

  /// Σ cpu/mem limits of replicas resident on a node.
  std::pair<double, double> node_usage(const std::string& node_id) const {
    double cpu = 0.0, mem = 0.0;
    for (const auto& [pod, reps] : replicas) {
      auto lim = limits.at(pod);
      for (const auto& r : reps)
        if (r.node_id == node_id) {
          cpu += lim.cpu;
          mem += lim.mem;
        }
    }
    return {cpu, mem};
  }

  /// Distinct nodes hosting the pod, in replica order.
  std::vector<std::string> nodes_of(const std::string& pod) const {
    std::vector<std::string> out;
    auto it = replicas.find(pod);
    if (it == replicas.end()) return out;
    for (const auto& r : it->second)
      if (std::find(out.begin(), out.end(), r.node_id) == out.end()) out.push_back(r.node_id);
    return out;
  }
};

enum class CapacityVerdict { Ok, InsufficientCpu, InsufficientMem };

inline const char* to_string(CapacityVerdict v) {
  switch (v) {
    case CapacityVerdict::Ok: return "ok";
    case CapacityVerdict::InsufficientCpu: return "insufficient(cpu)";
    case CapacityVerdict::InsufficientMem: return "insufficient(mem)";
  }
  return "?";
}

inline CapacityVerdict capacity_check(const DeploymentState& state, const Topology& topo,
                                      const std::string& node_id, double extra_cpu,
                                      double extra_mem) {
  const Node* n = topo.find_node(node_id);
  if (!n) throw std::out_of_range("capacity_check: unknown node '" + node_id + "'");
  auto [cpu, mem] = state.node_usage(node_id);
  if (cpu + extra_cpu > n->cpu_capacity + kCapacityEps) return CapacityVerdict::InsufficientCpu;
  if (mem + extra_mem > n->mem_capacity + kCapacityEps) return CapacityVerdict::InsufficientMem;
  return CapacityVerdict::Ok;
}

/// Free CPU on a node after resident replicas.
inline double free_cpu(const DeploymentState& state, const Topology& topo, const std::string& node_id) {
  const Node* n = topo.find_node(node_id);
  return n ? n->cpu_capacity - state.node_usage(node_id).first : 0.0;
}

/// Cross-node hops of the request journey, in journey order:
/// ingress -> p1, p(i) -> p(i+1), pK -> ingress. Co-located hops yield nothing.
inline std::vector<FlowId> derive_flows(const DeploymentState& state, const Topology& topo,
                                        const Application& app) {
  std::vector<FlowId> out;
  auto push = [&](const std::string& s, const std::string& d) {
    if (s == d) return;
    FlowId f{s, d};
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  };
  std::vector<std::string> prev{topo.ingress_host};
  for (const auto& pod : app.pods) {
    auto cur = state.nodes_of(pod.id);
    for (const auto& s : prev)
      for (const auto& d : cur) push(s, d);
    prev = std::move(cur);
  }
  for (const auto& s : prev) push(s, topo.ingress_host);
  return out;
}

/// Links traversed by a switch path.
inline std::vector<LinkKey> path_links(const Path& p) {
  std::vector<LinkKey> out;
  for (std::size_t i = 1; i < p.size(); ++i) out.emplace_back(p[i - 1], p[i]);
  return out;
}

/// Simple path over up links between the flow endpoints' attachment switches.
inline std::optional<std::string> check_route(const Topology& topo, const FlowId& flow, const Path& path) {
  if (path.empty()) return "empty path";
  const Node* s = topo.find_node(flow.src);
  const Node* d = topo.find_node(flow.dst);
  if (!s || !d) return "unknown flow endpoint";
  if (path.front() != s->attached_switch || path.back() != d->attached_switch)
    return "path endpoints do not match host attachments";
  std::set<std::string> seen;
  for (const auto& sw : path) {
    if (!topo.has_switch(sw)) return "unknown switch " + sw;
    if (!seen.insert(sw).second) return "path revisits " + sw;
  }
  for (const auto& k : path_links(path)) {
    const Link* l = topo.find_link(k);
    if (!l) return "no link " + k.name();
    if (!l->up) return "link " + k.name() + " is down";
  }
  return std::nullopt;
}

struct StateIssue {
  std::string code;
  std::string detail;
};

/// Checks every DeploymentState invariant against the topology and chain.
inline std::vector<StateIssue> validate_state(const DeploymentState& state, const Topology& topo,
                                              const Application& app) {
  std::vector<StateIssue> out;
  for (const auto& pod : app.pods) {
    auto it = state.replicas.find(pod.id);
    int n = it == state.replicas.end() ? 0 : static_cast<int>(it->second.size());
    if (n < 1 || n > state.max_replicas) out.push_back({"replica_bounds", pod.id});
    if (!state.limits.count(pod.id)) {
      out.push_back({"unknown_id", "no limits for " + pod.id});
      continue;
    }
    auto lim = state.limits.at(pod.id);
    if (lim.cpu < state.cpu_floor - kCapacityEps || !(lim.mem > 0.0))
      out.push_back({"limit_floor", pod.id});
    if (it != state.replicas.end())
      for (const auto& r : it->second) {
        const Node* node = topo.find_node(r.node_id);
        if (!node) out.push_back({"unknown_id", r.replica_id + " on " + r.node_id});
        if (pod.pinned_node && r.node_id != *pod.pinned_node) out.push_back({"pinned", r.replica_id});
      }
  }
  for (const auto& n : topo.nodes) {
    auto [cpu, mem] = state.node_usage(n.id);
    if (cpu > n.cpu_capacity + kCapacityEps) out.push_back({"insufficient_capacity", n.id + " cpu"});
    if (mem > n.mem_capacity + kCapacityEps) out.push_back({"insufficient_capacity", n.id + " mem"});
  }
  for (const auto& [flow, path] : state.routes.paths)
    if (auto err = check_route(topo, flow, path)) out.push_back({"invalid_path", *err});
  return out;
}

}  // namespace icsim
