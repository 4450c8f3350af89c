#include "support.hpp"

#include <gtest/gtest.h>

using namespace icsim;

namespace {

const char* kMinimal = R"(
name: tiny
duration: 60
topology:
  ingress_host: N
  switches: [S1, S2]
  nodes:
    - {id: N, cpu: 4, mem: 4096, switch: S1}
    - {id: W, cpu: 4, mem: 4096, switch: S2}
  links:
    - {ends: [S1, S2], capacity: 50, latency: 2}
pods:
  - {id: b, chain_index: 2, cpu_limit: 0.5, mem_limit: 256, work_demand: 0.1}
  - {id: a, chain_index: 1, cpu_limit: 0.5, mem_limit: 256, work_demand: 0.1}
placement: {a: N, b: [W, W]}
load:
  phases: [{users: 2, duration: 60}]
events:
  - {kind: background, link: [S2, S1], rate: 10, start: 5, end: 20}
  - {kind: link_down, link: [S1, S2], at: 30}
)";

ScenarioConfig minimal() { return scenario_from_yaml(YAML::Load(kMinimal)); }

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
  for (const auto& i : issues)
    if (i.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Scenario, ParsesShippedScenarios) {
  for (auto cfg : {icsim::testing::computing(), icsim::testing::networking()}) {
    EXPECT_TRUE(validate_scenario(cfg).empty()) << cfg.name;
    EXPECT_EQ(cfg.app.pods.size(), 4u);
    EXPECT_EQ(cfg.duration, 900.0);
    EXPECT_TRUE(std::filesystem::exists(cfg.few_shot_dir / "compute.json"));
  }
  auto net = icsim::testing::networking();
  ASSERT_EQ(net.background.size(), 2u);
  EXPECT_EQ(net.background[0].id, "e1");
  EXPECT_EQ(net.background[1].links.size(), 2u);
}

TEST(Scenario, ParsesMinimalDocument) {
  auto cfg = minimal();
  EXPECT_EQ(cfg.name, "tiny");
  ASSERT_EQ(cfg.app.pods.size(), 2u);
  EXPECT_EQ(cfg.app.pods[0].id, "a");  // ordered by chain index
  EXPECT_EQ(cfg.placement.at("b"), (std::vector<std::string>{"W", "W"}));
  EXPECT_EQ(cfg.topology.links[0].latency, 2.0);
  ASSERT_EQ(cfg.background.size(), 1u);
  EXPECT_EQ(cfg.background[0].links[0], LinkKey("S1", "S2"));
  ASSERT_EQ(cfg.link_changes.size(), 1u);
  EXPECT_FALSE(cfg.link_changes[0].up);
  EXPECT_EQ(cfg.intent.upper_threshold, 3.0);
  EXPECT_EQ(cfg.decider.kind, DeciderSpec::Kind::Heuristic);
  EXPECT_TRUE(validate_scenario(cfg).empty());
  EXPECT_EQ(initial_state(cfg).replicas.at("b").size(), 2u);
}

TEST(Scenario, ReportsInvalidDocuments) {
  auto cfg = minimal();
  cfg.placement["a"] = {"Nowhere"};
  EXPECT_TRUE(mentions(validate_scenario(cfg), "unknown node"));

  cfg = minimal();
  cfg.app.pods[1].chain_index = 5;
  EXPECT_TRUE(mentions(validate_scenario(cfg), "chain_index"));

  cfg = minimal();
  cfg.background[0].end = 1.0;
  EXPECT_TRUE(mentions(validate_scenario(cfg), "start < end"));

  cfg = minimal();
  cfg.background[0].links = {LinkKey("S1", "S9")};
  EXPECT_TRUE(mentions(validate_scenario(cfg), "unknown link"));

  cfg = minimal();
  cfg.intent.lower_threshold = 5.0;
  EXPECT_FALSE(validate_scenario(cfg).empty());

  cfg = minimal();
  cfg.telemetry.alpha = 1.5;
  EXPECT_TRUE(mentions(validate_scenario(cfg), "alpha"));

  cfg = minimal();
  cfg.topology.nodes[1].cpu_capacity = 0.5;  // two replicas of 0.5 cores
  EXPECT_TRUE(mentions(validate_scenario(cfg), "insufficient_capacity"));

  cfg = minimal();
  cfg.schema_version = 9;
  EXPECT_TRUE(mentions(validate_scenario(cfg), "schema_version"));
}

TEST(Scenario, MalformedYamlIsAScenarioError) {
  EXPECT_THROW(scenario_from_yaml(YAML::Load("name: x\n")), ScenarioError);
  EXPECT_THROW(scenario_from_yaml(YAML::Load(std::string(kMinimal) + "decider: oracle\n")), ScenarioError);
  auto bad_event = YAML::Load(kMinimal);
  bad_event["events"].push_back(YAML::Load("{kind: earthquake}"));
  EXPECT_THROW(scenario_from_yaml(bad_event), ScenarioError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.yaml"), ScenarioError);
}

TEST(Decider, ParsesSelectors) {
  EXPECT_EQ(parse_decider("heuristic").label(), "heuristic");
  EXPECT_EQ(parse_decider("llm").kind, DeciderSpec::Kind::Llm);
  auto h = parse_decider("hpa:0.7");
  EXPECT_EQ(h.kind, DeciderSpec::Kind::Hpa);
  EXPECT_DOUBLE_EQ(h.hpa_target, 0.7);
  EXPECT_EQ(h.label(), "hpa:0.70");
  auto f = parse_decider("fixture:computing_decisions.jsonl", "/data");
  EXPECT_EQ(f.fixture, "/data/computing_decisions.jsonl");
  EXPECT_EQ(f.label(), "fixture:computing_decisions.jsonl");
  EXPECT_EQ(parse_decider("fixture:/abs/x.jsonl", "/data").fixture, "/abs/x.jsonl");
  EXPECT_THROW(parse_decider("hpa:zero"), std::invalid_argument);
  EXPECT_THROW(parse_decider("hpa:1.5"), std::invalid_argument);
  EXPECT_THROW(parse_decider("oracle"), std::invalid_argument);
}
