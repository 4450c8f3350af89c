#include "support.hpp"

#include <gtest/gtest.h>

using namespace icsim;
using icsim::testing::computing;
using icsim::testing::initial_snapshot;

namespace {

Snapshot minimal() {
  Snapshot s;
  s.topology.switches = {"S1"};
  s.topology.nodes = {{"N", 4.0, 4096.0, "S1", true}};
  s.topology.ingress_host = "N";
  PodSpec p;
  p.id = "p1";
  p.chain_index = 1;
  p.cpu_limit = 0.5;
  p.mem_limit = 256.0;
  s.app.pods = {p};
  s.state.replicas["p1"] = {{"p1-0", "N"}};
  s.state.limits["p1"] = {0.5, 256.0};
  return s;
}

Snapshot at_first_upper_violation(const ScenarioConfig& cfg, const Trace& tr) {
  for (const auto& e : tr.events)
    if (e.kind == "violation" && e.payload["direction"] == "upper") {
      Violation v{e.payload["direction"] == "upper" ? Direction::Upper : Direction::Lower, e.time,
                  e.payload["ema_rt"].get<double>(), e.payload["index"].get<int>()};
      auto s = initial_snapshot(cfg, v);
      s.monitoring = aggregate(tr.samples, cfg.telemetry.window_len, cfg.telemetry.k_pre, e.time);
      return s;
    }
  throw std::runtime_error("no violation in trace");
}

}  // namespace

TEST(Snapshot, MinimalState) {
  auto j = to_json(minimal());
  EXPECT_EQ(j["cluster_info"]["nodes"].size(), 1u);
  EXPECT_EQ(j["cluster_info"]["pods"].size(), 1u);
  EXPECT_TRUE(j["network_info"]["links"].empty());
}

TEST(Snapshot, ComputingFixtureAtFirstViolation) {
  auto cfg = computing();
  auto tr = simulate(cfg);
  auto s = at_first_upper_violation(cfg, tr);
  auto j = to_json(s);
  EXPECT_EQ(j["cluster_info"]["nodes"].size(), 4u);
  EXPECT_EQ(j["cluster_info"]["pods"].size(), 4u);
  EXPECT_EQ(j["network_info"]["links"].size(), 5u);
  auto doc = build_prompt(s, load_few_shot_library(cfg.few_shot_dir));
  auto mon = json::parse(doc.monitoring_data);
  EXPECT_EQ(mon["pre_violation"].size(), 3u);
  EXPECT_TRUE(mon["violation_window"].is_object());
}

TEST(Snapshot, SerializationIsStable) {
  auto s = initial_snapshot(computing());
  const auto a = serialize(s);
  EXPECT_EQ(a, serialize(s));
  EXPECT_EQ(dump_canonical(json::parse(a)), a);
}

TEST(Prompt, CarriesAllBlocksAndTwoExamples) {
  auto cfg = computing();
  auto lib = load_few_shot_library(cfg.few_shot_dir);
  auto doc = build_prompt(initial_snapshot(cfg), lib);
  ASSERT_EQ(doc.few_shot.size(), 2u);
  EXPECT_EQ(doc.few_shot[0].kind, "compute");
  EXPECT_EQ(doc.few_shot[1].kind, "network");
  for (const auto& part : {doc.cluster_info, doc.network_info, doc.monitoring_data, doc.intent_block})
    EXPECT_NE(doc.user.find(part), std::string::npos);
  EXPECT_FALSE(doc.narrative.empty());
}

TEST(Prompt, EmptyLibraryStillValid) {
  auto doc = build_prompt(initial_snapshot(computing()), {});
  EXPECT_TRUE(doc.few_shot.empty());
  EXPECT_GT(doc.token_estimate, 0);
}

TEST(Prompt, TokenEstimateIsCeilOfQuarterChars) {
  EXPECT_EQ(estimate_tokens(0), 0);
  EXPECT_EQ(estimate_tokens(1), 1);
  EXPECT_EQ(estimate_tokens(4), 1);
  EXPECT_EQ(estimate_tokens(5), 2);
  auto doc = build_prompt(initial_snapshot(computing()), {});
  const auto chars = doc.narrative.size() + doc.user.size();
  EXPECT_EQ(doc.token_estimate, static_cast<long>((chars + 3) / 4));
}

TEST(Prompt, EstimateGrowsWithSnapshotSize) {
  auto cfg = computing();
  long last = 0;
  std::size_t last_len = 0;
  for (int extra = 0; extra < 20; ++extra) {
    cfg.topology.nodes.push_back({"X" + std::to_string(extra), 8.0, 8192.0, "S1", true});
    auto s = initial_snapshot(cfg);
    auto doc = build_prompt(s, {});
    const auto len = serialize(s).size();
    EXPECT_GT(len, last_len);
    EXPECT_GE(doc.token_estimate, last);
    last = doc.token_estimate;
    last_len = len;
  }
}

TEST(Prompt, ShippedExamplesAreValidDecisions) {
  for (const auto& ex : load_few_shot_library(computing().few_shot_dir))
    EXPECT_NO_THROW(decision_from_json(ex.output)) << ex.name;
}
