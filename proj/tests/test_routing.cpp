#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace icsim;
using icsim::testing::computing;
using icsim::testing::networking;
using icsim::testing::brute_force_route;
using icsim::testing::random_graph;

TEST(Routing, ReturnLegAvoidsCongestedLink) {
  auto t = networking().topology;
  EXPECT_EQ(compute_route(t, "S3", "S2", {}, {LinkKey("S2", "S3")}), (Path{"S3", "S1", "S2"}));
  LinkUtilization u{{LinkKey("S2", "S3"), 0.97}};
  EXPECT_EQ(compute_route(t, "S3", "S2", u), (Path{"S3", "S1", "S2"}));
}

TEST(Routing, SameSwitchAndDisconnection) {
  auto t = computing().topology;
  EXPECT_EQ(compute_route(t, "S3", "S3", {}), (Path{"S3"}));
  for (auto& l : t.links) l.up = false;
  EXPECT_FALSE(compute_route(t, "S1", "S4", {}));
  EXPECT_THROW(compute_route(t, "S1", "S9", {}), std::out_of_range);
}

TEST(Routing, TieBreaksOnHopsThenSequence) {
  auto t = computing().topology;
  // S2 -> S3: direct beats two-hop alternatives.
  EXPECT_EQ(compute_route(t, "S2", "S3", {}), (Path{"S2", "S3"}));
  // Avoiding S2-S3 leaves S2-S1-S3 and S2-S4-S3; lexicographic order picks S1.
  EXPECT_EQ(compute_route(t, "S2", "S3", {}, {LinkKey("S2", "S3")}), (Path{"S2", "S1", "S3"}));
  // Utilization dominates hop count.
  LinkUtilization u{{LinkKey("S1", "S3"), 0.5}, {LinkKey("S2", "S3"), 0.6}};
  EXPECT_EQ(compute_route(t, "S2", "S3", u), (Path{"S2", "S4", "S3"}));
}

TEST(Routing, MatchesBruteForceOnFixture) {
  auto t = networking().topology;
  std::vector<std::optional<LinkKey>> avoids{std::nullopt};
  for (const auto& l : t.links) avoids.push_back(key_of(l));
  for (const auto& a : t.switches)
    for (const auto& b : t.switches)
      for (const auto& av : avoids) {
        std::set<LinkKey> avoid;
        if (av) avoid.insert(*av);
        EXPECT_EQ(compute_route(t, a, b, {}, avoid), brute_force_route(t, a, b, {}, avoid)) << a << "->" << b;
      }
}

TEST(Routing, MatchesBruteForceOnRandomGraphs) {
  std::mt19937_64 rng(2024);
  const double levels[] = {0.0, 0.3, 0.3, 0.95};
  for (int g = 0; g < 50; ++g) {
    auto t = random_graph(rng, 3 + static_cast<int>(rng() % 6));
    LinkUtilization u;
    for (const auto& l : t.links) u[key_of(l)] = levels[rng() % 4];
    for (const auto& a : t.switches)
      for (const auto& b : t.switches) {
        EXPECT_EQ(compute_route(t, a, b, u), brute_force_route(t, a, b, u, {}));
        if (!t.links.empty()) {
          std::set<LinkKey> avoid{key_of(t.links[rng() % t.links.size()])};
          auto p = compute_route(t, a, b, u, avoid);
          EXPECT_EQ(p, brute_force_route(t, a, b, u, avoid));
          if (p) {
            for (const auto& k : path_links(*p)) EXPECT_FALSE(avoid.count(k));
          }
        }
      }
  }
}

TEST(Routing, RecomputeIsIdempotent) {
  auto cfg = computing();
  auto s = initial_state(cfg);
  auto again = recompute_all_routes(s, cfg.topology, cfg.app, {});
  EXPECT_EQ(again, s.routes);
}

TEST(Routing, CongestionMovesReturnLeg) {
  auto cfg = networking();
  auto s = initial_state(cfg);
  ASSERT_EQ(s.routes.paths.at({"W3", "M"}), (Path{"S3", "S2"}));
  LinkUtilization u{{LinkKey("S2", "S3"), 0.95}};
  auto next = recompute_all_routes(s, cfg.topology, cfg.app, u);
  EXPECT_EQ(next.paths.at({"W3", "M"}), (Path{"S3", "S1", "S2"}));
  EXPECT_EQ(next.version, s.routes.version + 1);
  // Uncongested routes stay where they were.
  EXPECT_EQ(next.paths.at({"W2", "W3"}), s.routes.paths.at({"W2", "W3"}));
}

TEST(Routing, RecomputeAfterRelocationAndLinkLoss) {
  auto cfg = networking();
  auto s = initial_state(cfg);
  s.replicas["p3"] = {{"p3-0", "W1"}};
  cfg.topology.find_link({"S2", "S4"})->up = false;
  s.routes = recompute_all_routes(s, cfg.topology, cfg.app, {});
  auto flows = derive_flows(s, cfg.topology, cfg.app);
  ASSERT_EQ(s.routes.paths.size(), flows.size());
  for (const auto& f : flows) {
    const auto& p = s.routes.paths.at(f);
    EXPECT_FALSE(check_route(cfg.topology, f, p));
    for (const auto& k : path_links(p)) EXPECT_NE(k, LinkKey("S2", "S4"));
  }
}
