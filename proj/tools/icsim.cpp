// icsim command-line driver.
//
//   icsim run <scenario> --decider D [--seed N] [--duration S] --out DIR
//   icsim compare <scenario> --deciders D1,D2,... --out DIR
//   icsim scale --nodes 10,50,... --out DIR
//   icsim verify DIR
//
// Exit status: 0 ok, 1 invalid scenario or arguments, 2 run-time failure.

#include "icsim/harness.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#ifndef ICSIM_DATA_DIR
#define ICSIM_DATA_DIR "."
#endif

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kFailure = 2;

struct InvalidScenario : std::runtime_error {
  using std::runtime_error::runtime_error;
};

icsim::ScenarioConfig load(const std::string& file, std::optional<std::uint64_t> seed, std::optional<double> duration) {
  icsim::ScenarioConfig cfg;
  try {
    cfg = icsim::load_scenario(file);
  } catch (const icsim::ScenarioError& e) {
    throw InvalidScenario(e.what());
  }
  if (seed) cfg.seed = *seed;
  if (duration) cfg.duration = *duration;
  auto issues = icsim::validate_scenario(cfg);
  if (!issues.empty()) {
    for (const auto& i : issues) spdlog::error("{}: {}", file, i);
    throw InvalidScenario(file + ": " + std::to_string(issues.size()) + " problem(s)");
  }
  return cfg;
}

icsim::DeciderSpec decider(const std::string& s) {
  try {
    return icsim::parse_decider(s);
  } catch (const std::invalid_argument& e) {
    throw InvalidScenario(e.what());
  }
}

void print_summary(const std::string& label, const icsim::json& s) {
  std::printf("%-24s satisfaction=%.4f violations=%ld scale_ups=%ld mean_rt=%.3f\n", label.c_str(),
              s["intent_satisfaction"].get<double>(), s["violations"]["total"].get<long>(),
              s["scale_ups"].get<long>(), s["mean_rt"].get<double>());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-cloud continuum simulator with an intent-driven management loop"};
  app.require_subcommand(1);

  std::string scenario, out, decider_arg, deciders_arg, nodes_arg, verify_dir, few_shot;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;

  auto* run = app.add_subcommand("run", "simulate one scenario with one decider");
  run->add_option("scenario", scenario, "scenario YAML")->required()->check(CLI::ExistingFile);
  run->add_option("--decider", decider_arg, "llm | fixture:<file> | heuristic | hpa:<target>")->required();
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--duration", duration, "override the horizon (s)");
  run->add_option("--out", out, "output directory")->required();

  auto* cmp = app.add_subcommand("compare", "run one scenario under several deciders");
  cmp->add_option("scenario", scenario, "scenario YAML")->required()->check(CLI::ExistingFile);
  cmp->add_option("--deciders", deciders_arg, "comma-separated decider list")->required();
  cmp->add_option("--seed", seed, "override the scenario seed");
  cmp->add_option("--duration", duration, "override the horizon (s)");
  cmp->add_option("--out", out, "output directory")->required();

  auto* scale = app.add_subcommand("scale", "prompt size against continuum size");
  scale->add_option("--nodes", nodes_arg, "comma-separated node counts")->required();
  scale->add_option("--few-shot", few_shot, "few-shot example directory");
  scale->add_option("--seed", seed, "topology seed");
  scale->add_option("--out", out, "output directory")->required();

  auto* ver = app.add_subcommand("verify", "check a trace directory");
  ver->add_option("dir", verify_dir, "trace directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*run) {
      auto cfg = load(scenario, seed, duration);
      cfg.decider = decider(decider_arg);
      auto r = icsim::run_experiment(cfg, out);
      print_summary(r.trace.decider, r.summary);
      return kOk;
    }
    if (*cmp) {
      auto cfg = load(scenario, seed, duration);
      std::vector<icsim::DeciderSpec> specs;
      std::stringstream ss(deciders_arg);
      for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) specs.push_back(decider(item));
      if (specs.empty()) throw InvalidScenario("no deciders given");
      for (const auto& row : icsim::compare(cfg, specs, out)) print_summary(row.decider, row.summary);
      return kOk;
    }
    if (*scale) {
      std::vector<int> counts;
      std::stringstream ss(nodes_arg);
      for (std::string item; std::getline(ss, item, ',');) {
        try {
          counts.push_back(std::stoi(item));
        } catch (const std::exception&) {
          throw InvalidScenario("bad node count '" + item + "'");
        }
        if (counts.back() < 1) throw InvalidScenario("node counts must be positive");
      }
      if (few_shot.empty()) few_shot = std::string(ICSIM_DATA_DIR) + "/fixtures/fewshot";
      for (const auto& p : icsim::scalability_study(counts, few_shot, out, seed.value_or(7)))
        std::printf("nodes=%d tokens=%ld\n", p.nodes, p.token_estimate);
      return kOk;
    }
    if (*ver) {
      auto issues = icsim::verify_trace(verify_dir);
      for (const auto& i : issues) spdlog::error("{}", i);
      if (!issues.empty()) return kFailure;
      std::printf("%s: ok\n", verify_dir.c_str());
      return kOk;
    }
  } catch (const InvalidScenario& e) {
    spdlog::error("{}", e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kFailure;
}
