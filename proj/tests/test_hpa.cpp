#include "icsim/hpa.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace icsim;

TEST(Hpa, Examples) {
  EXPECT_EQ(hpa_desired(0.90, 0.60, 1), 2);
  EXPECT_EQ(hpa_desired(0.60, 0.60, 3), 3);
  HpaConfig cfg;
  cfg.target = 0.60;
  EXPECT_EQ(hpa_step(0.20, cfg, 3, 400.0, 300.0), 3);  // 100 s since the last change
  EXPECT_EQ(hpa_step(0.19, cfg, 3, 600.0, 300.0), 1);
}

TEST(Hpa, ClampsToBounds) {
  EXPECT_EQ(hpa_desired(0.0, 0.5, 4), 1);
  EXPECT_EQ(hpa_desired(5.0, 0.5, 4), 5);
  EXPECT_EQ(hpa_desired(-1.0, 0.5, 2), 1);
  EXPECT_THROW(hpa_desired(0.5, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(hpa_desired(0.5, 1.5, 1), std::invalid_argument);
}

TEST(Hpa, ScaleUpIgnoresCooldown) {
  HpaConfig cfg;
  cfg.target = 0.5;
  EXPECT_EQ(hpa_step(1.0, cfg, 1, 10.0, 5.0), 2);
}

TEST(Hpa, FormulaPropertyOverRandomTriples) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> util(0.0, 2.0), target(0.05, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double u = util(rng), t = target(rng);
    const int cur = 1 + static_cast<int>(rng() % 5);
    const int want = static_cast<int>(std::clamp(std::ceil(cur * u / t), 1.0, 5.0));
    const int got = hpa_desired(u, t, cur);
    EXPECT_EQ(got, want) << u << " " << t << " " << cur;
    EXPECT_GE(got, 1);
    EXPECT_LE(got, 5);
    EXPECT_EQ(hpa_desired(t, t, cur), cur);
    EXPECT_LE(hpa_desired(u * 0.9, t, cur), got);  // monotone in utilisation

    HpaConfig cfg;
    cfg.target = t;
    const double since = std::uniform_real_distribution<double>(0.0, 299.0)(rng);
    const int step = hpa_step(u, cfg, cur, 1000.0, 1000.0 - since);
    EXPECT_GE(step, cur);  // never scales down inside the cooldown
  }
}

TEST(Hpa, DecideCoversEveryPod) {
  HpaConfig cfg;
  cfg.target = 0.5;
  auto out = hpa_decide({{"a", 1.0}}, cfg, {{"a", 1}, {"b", 2}}, 500.0, {});
  EXPECT_EQ(out.at("a"), 2);
  EXPECT_EQ(out.at("b"), 1);  // missing utilisation reads as idle; no prior change
}
