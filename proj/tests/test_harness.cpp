#include "support.hpp"

#include <gtest/gtest.h>

using namespace icsim;
using icsim::testing::scratch;

TEST(Harness, BaselineOrderingOnComputing) {
  auto out = scratch("compare");
  auto cfg = icsim::testing::computing();
  std::vector<DeciderSpec> ds{parse_decider("heuristic"), parse_decider("hpa:0.50"), parse_decider("hpa:0.60"),
                              parse_decider("hpa:0.70")};
  auto rows = compare(cfg, ds, out);
  ASSERT_EQ(rows.size(), 4u);
  std::vector<double> sat;
  for (const auto& r : rows) sat.push_back(r.summary["intent_satisfaction"].get<double>());
  EXPECT_GT(sat[0], sat[1]);
  EXPECT_GT(sat[1], sat[2]);
  EXPECT_GT(sat[2], sat[3]);
  EXPECT_EQ(rows[3].summary["scale_ups"].get<long>(), 0);
  EXPECT_GE(sat[0], 80.0);
  EXPECT_TRUE(std::filesystem::exists(out / "comparison.csv"));
  EXPECT_TRUE(std::filesystem::exists(out / "comparison.json"));
  for (const auto& r : rows) EXPECT_TRUE(verify_trace(out / r.dir).empty()) << r.decider;
}

TEST(Harness, NetworkingInjectsTwoEpisodes) {
  auto tr = simulate(icsim::testing::networking());
  int starts = 0, decisions = 0;
  for (const auto& e : tr.events) {
    if (e.kind == "injection" && e.payload["kind"] == "background_start") ++starts;
    if (e.kind == "decision_requested") ++decisions;
  }
  EXPECT_EQ(starts, 2);
  EXPECT_GE(decisions, 2);
}

TEST(Harness, SyntheticScenariosAreValid) {
  for (int n : {1, 10, 57, 300}) {
    auto cfg = synthetic_scenario(n, 7);
    EXPECT_TRUE(validate_scenario(cfg).empty()) << n;
    EXPECT_EQ(cfg.topology.nodes.size(), static_cast<std::size_t>(n + 1));
    EXPECT_EQ(synthetic_scenario(n, 7).topology.links.size(), cfg.topology.links.size());
  }
  EXPECT_THROW(synthetic_scenario(0, 7), std::invalid_argument);
}

TEST(Harness, PromptGrowsWithContinuumSize) {
  auto out = scratch("scale");
  const auto fs = icsim::testing::source_dir() / "fixtures" / "fewshot";
  auto pts = scalability_study({10, 100, 600}, fs, out);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_LT(pts[0].token_estimate, pts[1].token_estimate);
  EXPECT_LT(pts[1].token_estimate, pts[2].token_estimate);
  std::vector<double> x, y;
  for (const auto& p : pts) {
    x.push_back(p.nodes);
    y.push_back(static_cast<double>(p.token_estimate));
  }
  EXPECT_GT(linear_fit(x, y)[2], 0.95);
  EXPECT_TRUE(std::filesystem::exists(out / "scalability.csv"));

  auto same = scalability_study({10, 10}, fs, scratch("scale_same"));
  EXPECT_EQ(same[0].token_estimate, same[1].token_estimate);
}

TEST(Harness, LinearFit) {
  auto f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_NEAR(f[0], 1.0, 1e-12);
  EXPECT_NEAR(f[1], 2.0, 1e-12);
  EXPECT_NEAR(f[2], 1.0, 1e-12);
  auto g = linear_fit({1, 2, 3, 4}, {1, 3, 2, 4});
  EXPECT_NEAR(g[1], 0.8, 1e-12);
  EXPECT_NEAR(g[2], 0.64, 1e-12);
}

TEST(Harness, LabelsMapToSafeDirectories) {
  EXPECT_EQ(label_dir("hpa:0.70"), "hpa_0.70");
  EXPECT_EQ(label_dir("fixture:a/b.jsonl"), "fixture_a_b.jsonl");
}
