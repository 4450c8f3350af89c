#pragma once

// Experiment drivers behind the command-line tool: single runs, side-by-side
// comparisons, the prompt-size scaling study and trace verification.

#include "icsim/decider.hpp"
#include "icsim/llm_client.hpp"
#include "icsim/metrics.hpp"
#include "icsim/prompt.hpp"
#include "icsim/scenario.hpp"
#include "icsim/sim.hpp"
#include "icsim/trace_io.hpp"

#include <cmath>
#include <filesystem>
#include <future>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace icsim {

/// Builds the decision maker for a decider selector; null for the HPA baseline.
inline std::unique_ptr<DecisionMaker> make_decider(const DeciderSpec& spec) {
  switch (spec.kind) {
    case DeciderSpec::Kind::Heuristic: return std::make_unique<HeuristicDecider>();
    case DeciderSpec::Kind::Fixture: return std::make_unique<FixtureDecider>(spec.fixture);
    case DeciderSpec::Kind::Llm: {
      auto cfg = LlmClientConfig::from_env();
      if (!cfg) throw std::runtime_error("llm decider needs ICSIM_LLM_BASE_URL and ICSIM_LLM_MODEL");
      return std::make_unique<LlmDecider>(*cfg);
    }
    case DeciderSpec::Kind::Hpa: return nullptr;
  }
  return nullptr;
}

/// Directory-safe label, e.g. "hpa:0.70" -> "hpa_0.70".
inline std::string label_dir(const std::string& label) {
  std::string out;
  for (char c : label) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_') ? c : '_';
  return out;
}

struct RunResult {
  Trace trace;
  json summary;
};

inline Trace simulate(const ScenarioConfig& cfg) {
  auto decider = make_decider(cfg.decider);
  Simulator sim(cfg, decider.get(), load_few_shot_library(cfg.few_shot_dir));
  return sim.run();
}

inline RunResult run_experiment(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  RunResult r;
  r.trace = simulate(cfg);
  r.summary = write_trace(out_dir, r.trace);
  return r;
}

struct ComparisonRow {
  std::string decider;
  std::string dir;
  json summary;
};

inline double mean_normalized_cpu(const json& summary) {
  double sum = 0.0;
  int n = 0;
  for (const auto& [_, v] : summary["normalized_cpu"].items()) {
    sum += v.get<double>();
    ++n;
  }
  return n ? sum / n : 0.0;
}

/// Runs the scenario once per decider (concurrently) into out/<label>/ and
/// writes comparison.csv and comparison.json.
inline std::vector<ComparisonRow> compare(const ScenarioConfig& base, const std::vector<DeciderSpec>& deciders,
                                          const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  std::vector<std::future<ComparisonRow>> jobs;
  for (const auto& d : deciders) {
    jobs.push_back(std::async(std::launch::async, [base, d, out] {
      ScenarioConfig cfg = base;
      cfg.decider = d;
      const auto dir = out / label_dir(d.label());
      auto r = run_experiment(cfg, dir);
      return ComparisonRow{d.label(), dir.filename().string(), r.summary};
    }));
  }
  std::vector<ComparisonRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());

  std::string csv = "decider,intent_satisfaction,violations,decisions,fallbacks,scale_ups,scale_downs,"
                    "normalized_cpu,mean_rt,token_in,token_out\n";
  json all = json::array();
  for (const auto& r : rows) {
    const auto& s = r.summary;
    csv += r.decider + "," + fixed6(s["intent_satisfaction"].get<double>()) + "," +
           std::to_string(s["violations"]["total"].get<long>()) + "," + std::to_string(s["decisions"].get<long>()) +
           "," + std::to_string(s["fallbacks"].get<long>()) + "," + std::to_string(s["scale_ups"].get<long>()) + "," +
           std::to_string(s["scale_downs"].get<long>()) + "," + fixed6(mean_normalized_cpu(s)) + "," +
           fixed6(s["mean_rt"].get<double>()) + "," + std::to_string(s["token_in"].get<long>()) + "," +
           std::to_string(s["token_out"].get<long>()) + "\n";
    all.push_back({{"decider", r.decider}, {"dir", r.dir}, {"summary", s}});
  }
  write_text(out / "comparison.csv", csv);
  write_text(out / "comparison.json", dump_canonical(all, FloatStyle::Fixed6) + "\n");
  return rows;
}

// ---- prompt-size scaling ----

struct ScalePoint {
  int nodes = 0;
  int switches = 0;
  int links = 0;
  std::size_t prompt_chars = 0;
  long token_estimate = 0;
  std::optional<long> live_token_in;
  std::optional<double> live_latency;
};

/// Synthetic continuum with `nodes` workers plus an ingress host: one switch
/// per eight hosts joined by a random spanning tree and a few chords.
inline ScenarioConfig synthetic_scenario(int nodes, std::uint64_t seed) {
  if (nodes < 1) throw std::invalid_argument("synthetic_scenario: need at least one node");
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(nodes));
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>((rng() >> 11) % n); };
  ScenarioConfig c;
  c.name = "synthetic-" + std::to_string(nodes);
  c.seed = seed;
  const int nsw = std::max(2, (nodes + 7) / 8);
  for (int i = 1; i <= nsw; ++i) c.topology.switches.push_back("S" + std::to_string(i));
  for (int i = 1; i < nsw; ++i) {
    const auto parent = c.topology.switches[pick(static_cast<std::size_t>(i))];
    c.topology.links.push_back({parent, c.topology.switches[static_cast<std::size_t>(i)], 100.0, 1.0, true});
  }
  for (int k = 0; k < nsw / 4; ++k) {
    auto a = c.topology.switches[pick(static_cast<std::size_t>(nsw))];
    auto b = c.topology.switches[pick(static_cast<std::size_t>(nsw))];
    LinkKey key{a, b};
    if (a == b || c.topology.find_link(key)) continue;
    c.topology.links.push_back({key.lo, key.hi, 100.0, 1.0, true});
  }
  c.topology.nodes.push_back({"M", 32.0, 65536.0, "S1", false});
  c.topology.ingress_host = "M";
  for (int i = 1; i <= nodes; ++i)
    c.topology.nodes.push_back({"W" + std::to_string(i), 32.0, 65536.0,
                                c.topology.switches[pick(static_cast<std::size_t>(nsw))], true});
  for (int i = 1; i <= 4; ++i) {
    PodSpec p;
    p.id = "p" + std::to_string(i);
    p.chain_index = i;
    p.cpu_limit = 0.5;
    p.mem_limit = 512.0;
    p.work_demand = 0.1;
    c.app.pods.push_back(p);
    c.placement[p.id] = {"W" + std::to_string(1 + pick(static_cast<std::size_t>(nodes)))};
  }
  c.load.phases = {{5, 60.0}};
  c.duration = 60.0;
  c.decider.kind = DeciderSpec::Kind::Heuristic;
  return c;
}

/// Prompt size as the continuum grows. Live columns are filled only when a
/// model endpoint is configured in the environment.
inline std::vector<ScalePoint> scalability_study(const std::vector<int>& node_counts,
                                                 const std::filesystem::path& few_shot_dir,
                                                 const std::filesystem::path& out, std::uint64_t seed = 7) {
  const auto library = load_few_shot_library(few_shot_dir);
  std::unique_ptr<LlmDecider> live;
  if (auto cfg = LlmClientConfig::from_env()) live = std::make_unique<LlmDecider>(*cfg);

  std::vector<ScalePoint> pts;
  for (int n : node_counts) {
    auto cfg = synthetic_scenario(n, seed);
    if (auto issues = validate_scenario(cfg); !issues.empty())
      throw std::logic_error("synthetic scenario invalid: " + issues.front());
    // Short warm-up so the monitoring windows carry real samples. Detection
    // is pushed out of reach; only the final state and samples matter.
    cfg.intent.upper_threshold = 1e9;
    cfg.intent.lower_threshold = 0.0;
    auto tr = simulate(cfg);
    Snapshot snap{cfg.topology, cfg.app, tr.final_state,
                  aggregate(tr.samples, cfg.telemetry.window_len, cfg.telemetry.k_pre, cfg.duration),
                  cfg.telemetry.window_len, tr.requests.empty() ? 0.0 : tr.requests.back().ema_after,
                  IntentSpec{}, Violation{Direction::Upper, cfg.duration, 3.5, 0}};
    const auto prompt = build_prompt(snap, library);
    ScalePoint p;
    p.nodes = n;
    p.switches = static_cast<int>(cfg.topology.switches.size());
    p.links = static_cast<int>(cfg.topology.links.size());
    p.prompt_chars = prompt.narrative.size() + prompt.user.size();
    p.token_estimate = prompt.token_estimate;
    if (live) {
      try {
        auto reply = live->consult(Consultation{snap, prompt, 0, 0, {}});
        p.live_token_in = reply.token_in;
        p.live_latency = reply.wall_latency;
      } catch (const DecisionError&) {
      }
    }
    pts.push_back(p);
  }
  std::filesystem::create_directories(out);
  std::string csv = "nodes,switches,links,prompt_chars,token_estimate,live_token_in,live_latency\n";
  for (const auto& p : pts)
    csv += std::to_string(p.nodes) + "," + std::to_string(p.switches) + "," + std::to_string(p.links) + "," +
           std::to_string(p.prompt_chars) + "," + std::to_string(p.token_estimate) + "," +
           (p.live_token_in ? std::to_string(*p.live_token_in) : "") + "," +
           (p.live_latency ? fixed6(*p.live_latency) : "") + "\n";
  write_text(out / "scalability.csv", csv);
  return pts;
}

/// Least-squares fit y = a + b x; returns {a, b, r2}.
inline std::array<double, 3> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double a = (sy - b * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double my = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = a + b * x[i];
    ss_res += (y[i] - f) * (y[i] - f);
    ss_tot += (y[i] - my) * (y[i] - my);
  }
  return {a, b, ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0};
}

}  // namespace icsim
