#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace icsim;
using icsim::testing::computing;
using icsim::testing::networking;

namespace {

RejectReason reason(const ApplyResult& r) { return std::get<Rejection>(r).reason; }

}  // namespace

TEST(Actuator, PlaceP3OnWorker2) {
  auto cfg = computing();
  auto s = initial_state(cfg);
  auto r = apply(ServicePlacement{"p3", "W2"}, s, cfg.topology, cfg.app);
  ASSERT_FALSE(is_rejected(r));
  const auto& next = std::get<DeploymentState>(r);
  EXPECT_EQ(next.nodes_of("p2"), (std::vector<std::string>{"W2"}));
  EXPECT_EQ(next.nodes_of("p3"), (std::vector<std::string>{"W2"}));
  EXPECT_EQ(next.nodes_of("p4"), (std::vector<std::string>{"W3"}));
  EXPECT_TRUE(validate_state(next, cfg.topology, cfg.app).empty());
  for (const auto& f : derive_flows(next, cfg.topology, cfg.app)) EXPECT_TRUE(next.routes.paths.count(f));
}

TEST(Actuator, ScaleToCurrentCountIsNoOp) {
  auto cfg = computing();
  auto s = initial_state(cfg);
  auto r = apply(HorizontalScaling{"p2", 1}, s, cfg.topology, cfg.app);
  ASSERT_FALSE(is_rejected(r));
  EXPECT_EQ(std::get<DeploymentState>(r), s);
}

TEST(Actuator, VerticalBeyondNodeCapacity) {
  auto cfg = computing();
  auto s = initial_state(cfg);
  auto r = apply(VerticalScaling{"p1", 50.0, 312.0}, s, cfg.topology, cfg.app);
  ASSERT_TRUE(is_rejected(r));
  EXPECT_EQ(reason(r), RejectReason::InsufficientCapacity);
}

TEST(Actuator, RejectionReasons) {
  auto cfg = computing();
  auto s = initial_state(cfg);
  EXPECT_EQ(reason(apply(ServicePlacement{"p9", "W2"}, s, cfg.topology, cfg.app)), RejectReason::UnknownId);
  EXPECT_EQ(reason(apply(ServicePlacement{"p1", "W2"}, s, cfg.topology, cfg.app)), RejectReason::Pinned);
  EXPECT_EQ(reason(apply(ServicePlacement{"p2", "M"}, s, cfg.topology, cfg.app)), RejectReason::InsufficientCapacity);
  EXPECT_EQ(reason(apply(HorizontalScaling{"p2", 6}, s, cfg.topology, cfg.app)), RejectReason::ReplicaBounds);
  EXPECT_EQ(reason(apply(VerticalScaling{"p2", 0.1, 312.0}, s, cfg.topology, cfg.app)), RejectReason::InvalidLimits);
  EXPECT_EQ(reason(apply(FlowScheduling{{"W1", "W2"}, {"S2", "S1", "S4"}}, s, cfg.topology, cfg.app)),
            RejectReason::InvalidPath);
  EXPECT_EQ(reason(apply(FlowScheduling{{"W3", "W1"}, {"S3", "S2"}}, s, cfg.topology, cfg.app)), RejectReason::UnknownId);
}

TEST(Actuator, FlowSchedulingInstallsPathAndBumpsVersion) {
  auto cfg = networking();
  auto s = initial_state(cfg);
  auto r = apply(FlowScheduling{{"W3", "M"}, {"S3", "S1", "S2"}}, s, cfg.topology, cfg.app);
  ASSERT_FALSE(is_rejected(r));
  const auto& next = std::get<DeploymentState>(r);
  EXPECT_EQ(next.routes.paths.at({"W3", "M"}), (Path{"S3", "S1", "S2"}));
  EXPECT_EQ(next.routes.version, s.routes.version + 1);
}

TEST(Actuator, ScaleOutThenInRemovesNewestFirst) {
  auto cfg = computing();
  auto s = initial_state(cfg);
  s = std::get<DeploymentState>(apply(HorizontalScaling{"p3", 3}, s, cfg.topology, cfg.app));
  ASSERT_EQ(s.replicas.at("p3").size(), 3u);
  const auto first = s.replicas.at("p3")[0];
  const auto second = s.replicas.at("p3")[1];
  s = std::get<DeploymentState>(apply(HorizontalScaling{"p3", 2}, s, cfg.topology, cfg.app));
  EXPECT_EQ(s.replicas.at("p3"), (std::vector<Replica>{first, second}));
}

TEST(Actuator, PlacementMovesAllReplicasTogether) {
  auto cfg = computing();
  auto s = initial_state(cfg);
  s = std::get<DeploymentState>(apply(HorizontalScaling{"p4", 3}, s, cfg.topology, cfg.app));
  s = std::get<DeploymentState>(apply(ServicePlacement{"p4", "W1"}, s, cfg.topology, cfg.app));
  EXPECT_EQ(s.nodes_of("p4"), (std::vector<std::string>{"W1"}));
  EXPECT_EQ(s.replicas.at("p4").size(), 3u);
}

TEST(Actuator, AtomicityUnderRandomActions) {
  auto cfg = networking();
  cfg.topology.nodes[2].cpu_capacity = 2.0;  // W2: tight so capacity rejections happen
  cfg.topology.nodes[3].mem_capacity = 2048.0;
  std::mt19937_64 rng(17);
  auto pick = [&](std::size_t n) { return rng() % n; };
  const std::vector<std::string> pods{"p1", "p2", "p3", "p4", "px"};
  const std::vector<std::string> nodes{"M", "W1", "W2", "W3", "Wx"};
  int rejected = 0, applied = 0;
  for (int run = 0; run < 20; ++run) {
    auto s = initial_state(cfg);
    for (int step = 0; step < 100; ++step) {
      const auto& pod = pods[pick(pods.size())];
      Action a;
      switch (pick(4)) {
        case 0: a = ServicePlacement{pod, nodes[pick(nodes.size())]}; break;
        case 1: a = HorizontalScaling{pod, static_cast<int>(pick(7))}; break;
        case 2: a = VerticalScaling{pod, 0.1 * static_cast<double>(pick(30)), 100.0 * static_cast<double>(pick(20))}; break;
        default: {
          auto flows = derive_flows(s, cfg.topology, cfg.app);
          FlowId f = flows.empty() ? FlowId{"W1", "W2"} : flows[pick(flows.size())];
          Path p;
          for (auto n = 1 + pick(4); n > 0; --n) p.push_back(cfg.topology.switches[pick(6)]);
          a = FlowScheduling{f, p};
        }
      }
      const auto before = s;
      auto r = apply(a, s, cfg.topology, cfg.app);
      if (is_rejected(r)) {
        ++rejected;
        EXPECT_EQ(s, before);
      } else {
        ++applied;
        s = std::get<DeploymentState>(std::move(r));
      }
      ASSERT_TRUE(validate_state(s, cfg.topology, cfg.app).empty()) << "after " << to_json(a).dump();
    }
  }
  EXPECT_GT(rejected, 0);
  EXPECT_GT(applied, 0);
}
