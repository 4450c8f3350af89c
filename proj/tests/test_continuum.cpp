#include "support.hpp"

#include <gtest/gtest.h>

using namespace icsim;
using icsim::testing::computing;
using icsim::testing::networking;

namespace {

bool has_code(const std::vector<TopologyIssue>& issues, const std::string& code) {
  for (const auto& i : issues)
    if (i.code == code) return true;
  return false;
}

Topology one_node(double cpu) {
  Topology t;
  t.switches = {"S1"};
  t.nodes = {{"T", cpu, 1024.0, "S1", true}};
  t.ingress_host = "T";
  return t;
}

}  // namespace

TEST(Topology, ShippedFixturesAreValid) {
  EXPECT_TRUE(validate_topology(computing().topology).empty());
  EXPECT_TRUE(validate_topology(networking().topology).empty());
  EXPECT_EQ(networking().topology.switches.size(), 6u);
}

TEST(Topology, DuplicateLinkIsReported) {
  auto t = computing().topology;
  t.links.push_back({"S2", "S1", 100.0, 1.0, true});
  EXPECT_TRUE(has_code(validate_topology(t), "duplicate-link"));
}

TEST(Topology, SplitGraphIsReported) {
  auto t = computing().topology;
  for (auto& l : t.links)
    if (l.a == "S4" || l.b == "S4") l.up = false;
  EXPECT_TRUE(has_code(validate_topology(t), "disconnected"));
}

TEST(Topology, UnknownSwitchAndBadCapacity) {
  auto t = computing().topology;
  t.nodes.push_back({"X", 0.0, 10.0, "S9", true});
  auto issues = validate_topology(t);
  EXPECT_FALSE(issues.empty());
}

TEST(Topology, LinkKeyIsUndirected) {
  EXPECT_EQ(LinkKey("S3", "S1"), LinkKey("S1", "S3"));
  EXPECT_EQ(LinkKey("S3", "S1").name(), "S1-S3");
}

TEST(Capacity, TableValuesFitOnWorker) {
  auto cfg = computing();
  auto s = initial_state(cfg);
  s.replicas["p3"] = {{"p3-0", "W2"}};
  EXPECT_EQ(capacity_check(s, cfg.topology, "W2", 0.3, 312.0), CapacityVerdict::Ok);
  EXPECT_EQ(capacity_check(s, cfg.topology, "W2", 0.0, 0.0), CapacityVerdict::Ok);
}

TEST(Capacity, ResidualTooSmall) {
  auto t = one_node(1.0);
  DeploymentState s;
  s.replicas["a"] = {{"a-0", "T"}};
  s.limits["a"] = {0.9, 100.0};
  EXPECT_EQ(capacity_check(s, t, "T", 0.2, 0.0), CapacityVerdict::InsufficientCpu);
  EXPECT_EQ(capacity_check(s, t, "T", 0.1, 2000.0), CapacityVerdict::InsufficientMem);
  EXPECT_NEAR(free_cpu(s, t, "T"), 0.1, 1e-12);
}

TEST(Flows, NetworkingPlacementFollowsChain) {
  auto cfg = networking();
  auto s = initial_state(cfg);
  auto flows = derive_flows(s, cfg.topology, cfg.app);
  std::vector<FlowId> want{{"M", "W1"}, {"W1", "W2"}, {"W2", "W3"}, {"W3", "M"}};
  EXPECT_EQ(flows, want);
  // M and W1 share S2, so the first hop has a single-switch path.
  EXPECT_EQ(s.routes.paths.at({"M", "W1"}), (Path{"S2"}));
}

TEST(Flows, CoLocatedChainOnlyHasIngressHops) {
  auto cfg = networking();
  auto s = initial_state(cfg);
  for (auto& [pod, reps] : s.replicas)
    for (auto& r : reps) r.node_id = "W1";
  EXPECT_EQ(derive_flows(s, cfg.topology, cfg.app), (std::vector<FlowId>{{"M", "W1"}, {"W1", "M"}}));
  for (auto& [pod, reps] : s.replicas)
    for (auto& r : reps) r.node_id = "M";
  EXPECT_TRUE(derive_flows(s, cfg.topology, cfg.app).empty());
}

TEST(Flows, MovingP3ToWorker1) {
  auto cfg = networking();
  auto s = initial_state(cfg);
  s.replicas["p3"] = {{"p3-0", "W1"}};
  auto flows = derive_flows(s, cfg.topology, cfg.app);
  std::vector<FlowId> want{{"M", "W1"}, {"W1", "W2"}, {"W2", "W1"}, {"W1", "W3"}, {"W3", "M"}};
  EXPECT_EQ(flows, want);
}

TEST(Flows, DerivationIsPure) {
  auto cfg = computing();
  auto s = initial_state(cfg);
  EXPECT_EQ(derive_flows(s, cfg.topology, cfg.app), derive_flows(s, cfg.topology, cfg.app));
}

TEST(State, InitialStatesSatisfyInvariants) {
  for (const auto& cfg : {computing(), networking()}) {
    auto s = initial_state(cfg);
    EXPECT_TRUE(validate_state(s, cfg.topology, cfg.app).empty());
    for (const auto& [flow, path] : s.routes.paths) EXPECT_FALSE(check_route(cfg.topology, flow, path));
  }
}

TEST(State, InvariantBreachesAreReported) {
  auto cfg = computing();
  auto s = initial_state(cfg);
  s.limits["p2"].cpu = 0.1;
  s.replicas["p1"].push_back({"p1-9", "W2"});
  s.routes.paths[{"W1", "W3"}] = {"S2", "S1", "S2", "S3"};
  std::set<std::string> codes;
  for (const auto& i : validate_state(s, cfg.topology, cfg.app)) codes.insert(i.code);
  EXPECT_TRUE(codes.count("limit_floor"));
  EXPECT_TRUE(codes.count("pinned"));
  EXPECT_TRUE(codes.count("invalid_path"));
}

TEST(Route, CheckRouteRejectsBadPaths) {
  auto cfg = computing();
  FlowId f{"W2", "W3"};
  EXPECT_FALSE(check_route(cfg.topology, f, {"S4", "S3"}));
  EXPECT_TRUE(check_route(cfg.topology, f, {"S4", "S1", "S3"}));  // no S1-S4 link
  EXPECT_TRUE(check_route(cfg.topology, f, {"S2", "S3"}));        // wrong endpoint
  EXPECT_TRUE(check_route(cfg.topology, f, {}));
  auto t = cfg.topology;
  t.find_link({"S3", "S4"})->up = false;
  EXPECT_TRUE(check_route(t, f, {"S4", "S3"}));
}
