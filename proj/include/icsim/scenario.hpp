#pragma once

// Scenario description: substrate, chain, initial placement, intent, load,
// injected network events and decider selection. Loaded from YAML.

#include "icsim/continuum.hpp"
#include "icsim/hpa.hpp"
#include "icsim/intent.hpp"
#include "icsim/routing.hpp"
#include "icsim/telemetry.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace icsim {

inline constexpr int kScenarioSchemaVersion = 1;

struct LoadPhase {
  int users = 0;
  double duration = 0.0;  // s
};

struct LoadSchedule {
  std::vector<LoadPhase> phases;
  double spawn_rate = 1.0;     // users/s
  double think_time = 1.0;     // s
  double think_jitter = 0.2;   // s, uniform in [-jitter, +jitter]
  double payload_kb = 499.69;  // KB per hop
};

/// One injected congestion episode: the same rate on each listed link.
struct BackgroundFlow {
  std::vector<LinkKey> links;
  double rate = 0.0;  // Mb/s per link
  double start = 0.0;
  double end = 0.0;
  std::string id;  // optional label, e.g. "e1"
};

struct LinkStateChange {
  LinkKey link;
  double time = 0.0;
  bool up = false;
};

struct TelemetryConfig {
  double alpha = 0.02;
  double window_len = 10.0;
  int k_pre = 3;
  double sample_interval = 1.0;
  long min_requests = kDefaultMinRequests;
};

enum class QueueDiscipline { Fifo, ProcessorSharing };

struct Calibration {
  QueueDiscipline discipline = QueueDiscipline::Fifo;
  double residual_floor = 0.1;       // Mb/s
  double mem_base_fraction = 0.5;    // resident share of the memory limit per replica
  double link_timeout = 3.0;         // s a request waits on a down link before it fails
  int retry_limit = 2;               // re-asks after a malformed decision
};

struct DeciderSpec {
  enum class Kind { Heuristic, Fixture, Llm, Hpa };
  Kind kind = Kind::Heuristic;
  std::string fixture;  // resolved path for Kind::Fixture
  double hpa_target = 0.7;

  std::string label() const {
    switch (kind) {
      case Kind::Heuristic: return "heuristic";
      case Kind::Fixture: return "fixture:" + std::filesystem::path(fixture).filename().string();
      case Kind::Llm: return "llm";
      case Kind::Hpa: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "hpa:%.2f", hpa_target);
        return buf;
      }
    }
    return "?";
  }
};

/// Parses "heuristic", "llm", "fixture:<file>" or "hpa:<target>".
inline DeciderSpec parse_decider(const std::string& s, const std::filesystem::path& base_dir = {}) {
  DeciderSpec d;
  if (s == "heuristic") return d;
  if (s == "llm") {
    d.kind = DeciderSpec::Kind::Llm;
    return d;
  }
  if (s.rfind("fixture:", 0) == 0) {
    d.kind = DeciderSpec::Kind::Fixture;
    std::filesystem::path p = s.substr(8);
    d.fixture = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
    return d;
  }
  if (s.rfind("hpa:", 0) == 0) {
    d.kind = DeciderSpec::Kind::Hpa;
    try {
      d.hpa_target = std::stod(s.substr(4));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad hpa target in '" + s + "'");
    }
    if (!(d.hpa_target > 0.0 && d.hpa_target <= 1.0)) throw std::invalid_argument("hpa target must lie in (0, 1]");
    return d;
  }
  throw std::invalid_argument("unknown decider '" + s + "'");
}

struct ScenarioConfig {
  int schema_version = kScenarioSchemaVersion;
  std::string name = "scenario";
  Topology topology;
  Application app;
  std::map<std::string, std::vector<std::string>> placement;  // pod -> node per replica
  IntentSpec intent;
  LoadSchedule load;
  std::vector<BackgroundFlow> background;
  std::vector<LinkStateChange> link_changes;
  DeciderSpec decider;
  TelemetryConfig telemetry;
  Calibration calibration;
  HpaConfig hpa;
  int max_replicas = kDefaultMaxReplicas;
  double cpu_floor = kDefaultCpuFloor;
  double duration = 900.0;
  std::uint64_t seed = 1;
  std::filesystem::path few_shot_dir;  // resolved
  std::filesystem::path base_dir;      // directory of the scenario file
};

/// Deployment implied by the scenario's placement, with initial routes.
inline DeploymentState initial_state(const ScenarioConfig& cfg) {
  DeploymentState s;
  s.max_replicas = cfg.max_replicas;
  s.cpu_floor = cfg.cpu_floor;
  for (const auto& pod : cfg.app.pods) {
    s.limits[pod.id] = {pod.cpu_limit, pod.mem_limit};
    auto& reps = s.replicas[pod.id];
    auto it = cfg.placement.find(pod.id);
    if (it == cfg.placement.end()) continue;
    for (const auto& node : it->second) reps.push_back({s.next_replica_id(pod.id), node});
  }
  s.routes = recompute_all_routes(s, cfg.topology, cfg.app, {});
  return s;
}

/// Every reason the scenario cannot run; empty means valid.
inline std::vector<std::string> validate_scenario(const ScenarioConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.schema_version != kScenarioSchemaVersion)
    out.push_back("unsupported schema_version " + std::to_string(cfg.schema_version));
  for (const auto& i : validate_topology(cfg.topology)) out.push_back("topology: " + i.code + " (" + i.detail + ")");
  if (cfg.app.pods.empty()) out.push_back("no pods");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < cfg.app.pods.size(); ++i) {
    const auto& p = cfg.app.pods[i];
    if (!ids.insert(p.id).second) out.push_back("duplicate pod " + p.id);
    if (p.chain_index != static_cast<int>(i) + 1) out.push_back("chain_index values must be 1..K");
    if (p.cpu_limit < cfg.cpu_floor - kCapacityEps) out.push_back(p.id + ": cpu_limit below floor");
    if (!(p.mem_limit > 0.0)) out.push_back(p.id + ": mem_limit must be positive");
    if (p.work_demand < 0.0) out.push_back(p.id + ": negative work_demand");
    if (!(p.cpu_intensity > 0.0 && p.cpu_intensity <= 1.0)) out.push_back(p.id + ": cpu_intensity must lie in (0, 1]");
    if (p.pinned_node && !cfg.topology.find_node(*p.pinned_node)) out.push_back(p.id + ": unknown pinned node");
    if (!cfg.placement.count(p.id) || cfg.placement.at(p.id).empty()) out.push_back(p.id + ": no initial placement");
  }
  for (const auto& [pod, nodes] : cfg.placement) {
    if (!ids.count(pod)) out.push_back("placement for unknown pod " + pod);
    for (const auto& n : nodes)
      if (!cfg.topology.find_node(n)) out.push_back("placement of " + pod + " on unknown node " + n);
  }
  if (!out.empty()) return out;
  try {
    cfg.intent.validate();
  } catch (const std::exception& e) {
    out.push_back(e.what());
  }
  auto st = initial_state(cfg);
  for (const auto& i : validate_state(st, cfg.topology, cfg.app)) out.push_back("placement: " + i.code + " " + i.detail);
  for (const auto& ph : cfg.load.phases) {
    if (ph.users < 0) out.push_back("load: negative user count");
    if (!(ph.duration > 0.0)) out.push_back("load: phase duration must be positive");
  }
  if (!(cfg.load.payload_kb > 0.0)) out.push_back("load: payload must be positive");
  if (!(cfg.load.spawn_rate > 0.0)) out.push_back("load: spawn_rate must be positive");
  if (cfg.load.think_time < 0.0 || cfg.load.think_jitter < 0.0) out.push_back("load: negative think time");
  for (const auto& b : cfg.background) {
    if (b.links.empty()) out.push_back("background flow without links");
    for (const auto& k : b.links)
      if (!cfg.topology.find_link(k)) out.push_back("background flow on unknown link " + k.name());
    if (!(b.start < b.end)) out.push_back("background flow needs start < end");
    if (b.rate < 0.0) out.push_back("background flow rate must be >= 0");
  }
  for (const auto& c : cfg.link_changes)
    if (!cfg.topology.find_link(c.link)) out.push_back("link event on unknown link " + c.link.name());
  if (!(cfg.telemetry.alpha > 0.0 && cfg.telemetry.alpha < 1.0)) out.push_back("telemetry: alpha must lie in (0, 1)");
  if (!(cfg.telemetry.window_len > 0.0) || !(cfg.telemetry.sample_interval > 0.0))
    out.push_back("telemetry: window_len and sample_interval must be positive");
  if (!(cfg.duration > 0.0)) out.push_back("duration must be positive");
  return out;
}

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
T yget(const YAML::Node& n, const char* key, T fallback) {
  return n && n[key] ? n[key].as<T>() : fallback;
}

inline LinkKey ylink(const YAML::Node& n) {
  if (!n || !n.IsSequence() || n.size() != 2) throw ScenarioError("link must be a two-element list");
  return {n[0].as<std::string>(), n[1].as<std::string>()};
}

}  // namespace detail

inline ScenarioConfig scenario_from_yaml(const YAML::Node& root, const std::filesystem::path& base_dir = {}) {
  using detail::yget;
  ScenarioConfig c;
  try {
    c.base_dir = base_dir;
    c.schema_version = yget<int>(root, "schema_version", kScenarioSchemaVersion);
    c.name = yget<std::string>(root, "name", "scenario");
    c.duration = yget<double>(root, "duration", 900.0);
    c.seed = yget<std::uint64_t>(root, "seed", 1);
    c.max_replicas = yget<int>(root, "max_replicas", kDefaultMaxReplicas);
    c.cpu_floor = yget<double>(root, "cpu_floor", kDefaultCpuFloor);

    const auto topo = root["topology"];
    if (!topo) throw ScenarioError("missing topology");
    c.topology.ingress_host = yget<std::string>(topo, "ingress_host", "");
    for (const auto& s : topo["switches"]) c.topology.switches.push_back(s.as<std::string>());
    for (const auto& n : topo["nodes"]) {
      Node node;
      node.id = n["id"].as<std::string>();
      node.cpu_capacity = n["cpu"].as<double>();
      node.mem_capacity = n["mem"].as<double>();
      node.attached_switch = n["switch"].as<std::string>();
      node.schedulable = yget<bool>(n, "schedulable", true);
      c.topology.nodes.push_back(node);
    }
    for (const auto& l : topo["links"]) {
      Link link;
      auto k = detail::ylink(l["ends"]);
      link.a = k.lo;
      link.b = k.hi;
      link.capacity = yget<double>(l, "capacity", 100.0);
      link.latency = yget<double>(l, "latency", 1.0);
      link.up = yget<bool>(l, "up", true);
      c.topology.links.push_back(link);
    }

    for (const auto& p : root["pods"]) {
      PodSpec pod;
      pod.id = p["id"].as<std::string>();
      pod.chain_index = p["chain_index"].as<int>();
      pod.cpu_limit = p["cpu_limit"].as<double>();
      pod.mem_limit = p["mem_limit"].as<double>();
      pod.work_demand = p["work_demand"].as<double>();
      pod.cpu_intensity = yget<double>(p, "cpu_intensity", 1.0);
      if (p["pinned_node"]) pod.pinned_node = p["pinned_node"].as<std::string>();
      c.app.pods.push_back(pod);
    }
    c.app.sort_chain();

    for (const auto& kv : root["placement"]) {
      auto pod = kv.first.as<std::string>();
      if (kv.second.IsSequence())
        for (const auto& n : kv.second) c.placement[pod].push_back(n.as<std::string>());
      else
        c.placement[pod].push_back(kv.second.as<std::string>());
    }

    if (const auto in = root["intent"]) {
      c.intent.upper_threshold = yget<double>(in, "upper_threshold", 3.0);
      c.intent.lower_threshold = yget<double>(in, "lower_threshold", 1.0);
      c.intent.waiting_time = yget<double>(in, "waiting_time", 60.0);
      if (in["decision_latency"]) c.intent.decision_latency = in["decision_latency"].as<double>();
    }

    if (const auto ld = root["load"]) {
      for (const auto& ph : ld["phases"]) c.load.phases.push_back({ph["users"].as<int>(), ph["duration"].as<double>()});
      c.load.spawn_rate = yget<double>(ld, "spawn_rate", 1.0);
      c.load.think_time = yget<double>(ld, "think_time", 1.0);
      c.load.think_jitter = yget<double>(ld, "think_jitter", 0.2);
      c.load.payload_kb = yget<double>(ld, "payload_kb", 499.69);
    }

    for (const auto& e : root["events"]) {
      auto kind = e["kind"].as<std::string>();
      if (kind == "background") {
        BackgroundFlow b;
        if (e["links"]) for (const auto& l : e["links"]) b.links.push_back(detail::ylink(l));
        else b.links.push_back(detail::ylink(e["link"]));
        b.rate = e["rate"].as<double>();
        b.start = e["start"].as<double>();
        b.end = e["end"].as<double>();
        b.id = yget<std::string>(e, "id", "");
        c.background.push_back(std::move(b));
      } else if (kind == "link_down" || kind == "link_up") {
        c.link_changes.push_back({detail::ylink(e["link"]), e["at"].as<double>(), kind == "link_up"});
      } else {
        throw ScenarioError("unknown event kind '" + kind + "'");
      }
    }

    c.decider = parse_decider(yget<std::string>(root, "decider", "heuristic"), base_dir);

    if (const auto t = root["telemetry"]) {
      c.telemetry.alpha = yget<double>(t, "alpha", 0.02);
      c.telemetry.window_len = yget<double>(t, "window_len", 10.0);
      c.telemetry.k_pre = yget<int>(t, "k_pre", 3);
      c.telemetry.sample_interval = yget<double>(t, "sample_interval", 1.0);
      c.telemetry.min_requests = yget<long>(t, "min_requests", kDefaultMinRequests);
    }

    if (const auto k = root["calibration"]) {
      auto disc = yget<std::string>(k, "queue_discipline", "fifo");
      if (disc == "fifo") c.calibration.discipline = QueueDiscipline::Fifo;
      else if (disc == "processor_sharing") c.calibration.discipline = QueueDiscipline::ProcessorSharing;
      else throw ScenarioError("unknown queue_discipline '" + disc + "'");
      c.calibration.residual_floor = yget<double>(k, "residual_floor", 0.1);
      c.calibration.mem_base_fraction = yget<double>(k, "mem_base_fraction", 0.5);
      c.calibration.link_timeout = yget<double>(k, "link_timeout", 3.0);
      c.calibration.retry_limit = yget<int>(k, "retry_limit", 2);
    }

    if (const auto h = root["hpa"]) {
      c.hpa.sync_period = yget<double>(h, "sync_period", 15.0);
      c.hpa.metric_window = yget<double>(h, "metric_window", 60.0);
      c.hpa.cooldown = yget<double>(h, "cooldown", 300.0);
    }
    c.hpa.max_replicas = c.max_replicas;

    auto fs = yget<std::string>(root, "few_shot_dir", "");
    if (!fs.empty()) {
      std::filesystem::path p = fs;
      c.few_shot_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
  } catch (const YAML::Exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
  return c;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& file) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(file.string());
  } catch (const YAML::Exception& e) {
    throw ScenarioError("cannot read scenario " + file.string() + ": " + e.what());
  }
  return scenario_from_yaml(root, file.parent_path());
}

}  // namespace icsim
