#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

using namespace icsim;
using icsim::testing::scratch;
using icsim::testing::source_dir;

namespace {

int icsim_cli(const std::string& args) {
  const std::string cmd = std::string(ICSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string scenario(const char* name) { return (source_dir() / "scenarios" / name).string(); }

}  // namespace

TEST(Cli, RunThenVerify) {
  auto out = scratch("cli_run");
  ASSERT_EQ(icsim_cli("run " + scenario("computing.yaml") + " --decider heuristic --duration 200 --out " +
                      out.string()),
            0);
  EXPECT_TRUE(std::filesystem::exists(out / "summary.json"));
  EXPECT_EQ(icsim_cli("verify " + out.string()), 0);

  auto text = read_text(out / "summary.json");
  text.replace(text.find("\"decisions\":") + 12, 0, "1");
  write_text(out / "summary.json", text);
  EXPECT_EQ(icsim_cli("verify " + out.string()), 2);
}

TEST(Cli, FixtureDeciderRuns) {
  auto out = scratch("cli_fixture");
  const auto fx = (source_dir() / "fixtures" / "computing_decisions.jsonl").string();
  EXPECT_EQ(icsim_cli("run " + scenario("computing.yaml") + " --decider fixture:" + fx + " --seed 3 --duration 300 --out " +
                      out.string()),
            0);
}

TEST(Cli, InvalidInputsExitWithOne) {
  auto dir = scratch("cli_bad");
  write_text(dir / "bad.yaml", "name: broken\ntopology:\n  switches: [S1]\n  nodes: []\n  links: []\npods: []\n");
  EXPECT_EQ(icsim_cli("run " + (dir / "bad.yaml").string() + " --decider heuristic --out " + (dir / "o").string()), 1);
  EXPECT_EQ(icsim_cli("run " + scenario("computing.yaml") + " --decider oracle --out " + (dir / "o").string()), 1);
  EXPECT_EQ(icsim_cli("scale --nodes 10,x --out " + (dir / "s").string()), 1);
  EXPECT_EQ(icsim_cli("frobnicate"), 1);
}

TEST(Cli, RunTimeFailureExitsWithTwo) {
  auto dir = scratch("cli_fail");
  EXPECT_EQ(icsim_cli("run " + scenario("computing.yaml") + " --decider fixture:/nonexistent.jsonl --out " +
                      (dir / "o").string()),
            2);
  EXPECT_EQ(icsim_cli("verify " + (dir / "empty").string()), 2);
}

TEST(Cli, CompareAndScaleWriteOutputs) {
  auto dir = scratch("cli_cmp");
  EXPECT_EQ(icsim_cli("compare " + scenario("computing.yaml") + " --deciders heuristic,hpa:0.5 --duration 200 --out " +
                      (dir / "c").string()),
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "c" / "comparison.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "c" / "hpa_0.50" / "summary.json"));
  EXPECT_EQ(icsim_cli("scale --nodes 10,20 --out " + (dir / "s").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "s" / "scalability.csv"));
}
