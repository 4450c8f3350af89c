#pragma once

// SDN-side path selection. Paths are ordered by a total order:
// (max link utilisation along the path, hop count, switch sequence).

#include "icsim/continuum.hpp"

#include <limits>
#include <map>
#include <optional>
#include <set>

namespace icsim {

using LinkUtilization = std::map<LinkKey, double>;

inline constexpr double kCongestionThreshold = 0.9;

inline double util_of(const LinkUtilization& u, const LinkKey& k) {
  auto it = u.find(k);
  return it == u.end() ? 0.0 : it->second;
}

inline double path_max_util(const Path& p, const LinkUtilization& u) {
  double m = 0.0;
  for (const auto& k : path_links(p)) m = std::max(m, util_of(u, k));
  return m;
}

/// Best simple path from src to dst over up links not in `avoid`.
///
/// Minimax bottleneck first (Dijkstra on max-edge weight), then the
/// hop-shortest path in the subgraph whose links stay under that bottleneck,
/// then the lexicographically smallest switch sequence among those, picked
/// greedily from the source with BFS distances to the target.
inline std::optional<Path> compute_route(const Topology& topo, const std::string& src,
                                         const std::string& dst, const LinkUtilization& util,
                                         const std::set<LinkKey>& avoid = {}) {
  if (!topo.has_switch(src) || !topo.has_switch(dst))
    throw std::out_of_range("compute_route: unknown switch");
  if (src == dst) return Path{src};

  std::map<std::string, std::vector<std::pair<std::string, double>>> adj;
  for (const auto& l : topo.links) {
    if (!l.up) continue;
    LinkKey k = key_of(l);
    if (avoid.count(k)) continue;
    double w = util_of(util, k);
    adj[l.a].emplace_back(l.b, w);
    adj[l.b].emplace_back(l.a, w);
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::map<std::string, double> bottleneck;
  for (const auto& s : topo.switches) bottleneck[s] = kInf;
  bottleneck[src] = -kInf;
  using Item = std::pair<double, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.emplace(-kInf, src);
  while (!pq.empty()) {
    auto [b, cur] = pq.top();
    pq.pop();
    if (b > bottleneck[cur]) continue;
    for (const auto& [nb, w] : adj[cur]) {
      double nbv = std::max(b, w);
      if (nbv < bottleneck[nb]) {
        bottleneck[nb] = nbv;
        pq.emplace(nbv, nb);
      }
    }
  }
  const double best = bottleneck[dst];
  if (best == kInf) return std::nullopt;

  // Hop distances to dst within the admissible subgraph.
  std::map<std::string, std::vector<std::string>> sub;
  for (const auto& [a, es] : adj)
    for (const auto& [b, w] : es)
      if (w <= best) sub[a].push_back(b);
  for (auto& [_, v] : sub) std::sort(v.begin(), v.end());

  std::map<std::string, int> dist;
  std::queue<std::string> q;
  dist[dst] = 0;
  q.push(dst);
  while (!q.empty()) {
    auto cur = q.front();
    q.pop();
    for (const auto& nb : sub[cur])
      if (!dist.count(nb)) {
        dist[nb] = dist[cur] + 1;
        q.push(nb);
      }
  }

  Path path{src};
  std::string cur = src;
  while (cur != dst) {
    const int want = dist.at(cur) - 1;
    for (const auto& nb : sub[cur]) {
      auto it = dist.find(nb);
      if (it != dist.end() && it->second == want) {
        cur = nb;
        break;
      }
    }
    path.push_back(cur);
  }
  return path;
}

/// Re-derives the flow set and assigns a path to every flow.
///
/// A flow keeps its installed path while that path is still valid and stays
/// under the congestion threshold; otherwise (and for new flows) the path is
/// recomputed. The version is bumped iff the table changed.
inline RouteTable recompute_all_routes(const DeploymentState& state, const Topology& topo,
                                       const Application& app, const LinkUtilization& util,
                                       double congestion_threshold = kCongestionThreshold) {
  RouteTable next;
  next.version = state.routes.version;
  for (const auto& flow : derive_flows(state, topo, app)) {
    auto old = state.routes.paths.find(flow);
    if (old != state.routes.paths.end() && !check_route(topo, flow, old->second) &&
        path_max_util(old->second, util) < congestion_threshold) {
      next.paths.emplace(flow, old->second);
      continue;
    }
    auto p = compute_route(topo, topo.switch_of(flow.src), topo.switch_of(flow.dst), util);
    if (p) next.paths.emplace(flow, std::move(*p));
  }
  if (next.paths != state.routes.paths) ++next.version;
  return next;
}

}  // namespace icsim
