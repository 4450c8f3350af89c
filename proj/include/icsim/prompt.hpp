#pragma once

// Prompt assembly for language-model decision makers: a fixed system
// narrative, the three data blocks, the response templates and worked examples.

#include "icsim/canonical_json.hpp"
#include "icsim/snapshot.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace icsim {

struct FewShotExample {
  std::string name;
  std::string kind;  // "compute" or "network"
  json input;        // snapshot-shaped object
  json output;       // decision object
};

struct PromptDocument {
  std::string narrative;  // system message
  std::string cluster_info;
  std::string network_info;
  std::string monitoring_data;
  std::string intent_block;
  std::vector<FewShotExample> few_shot;
  std::string user;  // fully rendered user message
  long token_estimate = 0;
};

/// Rough token count: one token per four characters, rounded up.
inline long estimate_tokens(std::size_t chars) { return static_cast<long>((chars + 3) / 4); }

inline const std::string& system_narrative() {
  static const std::string text =
      "You are the decision maker of an intent-based management loop for a microservice application "
      "deployed on an edge-cloud compute continuum. Hosts run containerised pods managed by an "
      "orchestrator; hosts attach to software-defined switches whose forwarding paths are installed by "
      "an SDN controller. The application is a chain of pods: every request enters at the ingress host, "
      "visits each pod in chain order, and returns to the ingress host. Pods may have several replicas; "
      "requests are balanced across replicas round-robin, and every hop between different hosts travels "
      "along the switch path installed for that host pair.\n"
      "The user intent bounds the exponential moving average of the response time between a lower and an "
      "upper threshold. When the average leaves the band you receive cluster information, network "
      "information and monitoring data aggregated into fixed-length windows before and during the "
      "violation. Identify the source of the violation and recommend corrective actions.\n"
      "Available actions: service_placement (move every replica of a pod to a node), horizontal_scaling "
      "(set the replica count of a pod), vertical_scaling (set per-replica CPU cores and memory MiB), and "
      "flow_scheduling (install a switch path for a host-pair flow). Respect node capacities, pinned pods, "
      "the replica bound and the CPU floor. Prefer the smallest change that restores the intent; above the "
      "upper threshold add capacity or bypass congested or failed links, below the lower threshold release "
      "capacity.\n"
      "Answer with a single JSON object following the templates and nothing else.";
  return text;
}

inline const std::string& source_template() {
  static const std::string text =
      R"({"source":{"category":"cpu_shortage|memory_shortage|link_congestion|link_failure|over_provisioning|other","detail":"<short explanation>"}})";
  return text;
}

inline const std::string& action_template() {
  static const std::string text =
      R"({"actions":[{"type":"service_placement","pod":"<pod>","target_node":"<node>"},)"
      R"({"type":"horizontal_scaling","pod":"<pod>","replicas":<int>},)"
      R"({"type":"vertical_scaling","pod":"<pod>","cpu_limit":<cores>,"mem_limit":<MiB>},)"
      R"({"type":"flow_scheduling","flow":{"src":"<host>","dst":"<host>"},"path":["<switch>","..."]}]})";
  return text;
}

/// Reads every *.json example in a directory, sorted by file name.
inline std::vector<FewShotExample> load_few_shot_library(const std::filesystem::path& dir) {
  std::vector<FewShotExample> out;
  if (!std::filesystem::is_directory(dir)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    json j = json::parse(in);
    out.push_back({j.at("name").get<std::string>(), j.at("kind").get<std::string>(), j.at("input"), j.at("output")});
  }
  return out;
}

/// One compute-rooted and one network-rooted example, when the library has them.
inline std::vector<FewShotExample> select_few_shot(std::span<const FewShotExample> library) {
  std::vector<FewShotExample> out;
  for (const char* kind : {"compute", "network"}) {
    auto it = std::find_if(library.begin(), library.end(), [&](const FewShotExample& e) { return e.kind == kind; });
    if (it != library.end()) out.push_back(*it);
  }
  return out;
}

inline PromptDocument build_prompt(const Snapshot& snap, std::span<const FewShotExample> library) {
  PromptDocument doc;
  doc.narrative = system_narrative();
  doc.cluster_info = dump_canonical(cluster_info_json(snap));
  doc.network_info = dump_canonical(network_info_json(snap));
  doc.monitoring_data = dump_canonical(monitoring_data_json(snap));
  doc.intent_block = dump_canonical({{"intent", intent_json(snap.intent)}, {"violation", violation_json(snap.violation)}});
  doc.few_shot = select_few_shot(library);

  std::ostringstream u;
  u << "## Intent and violation\n" << doc.intent_block << "\n\n";
  u << "## Cluster information\n" << doc.cluster_info << "\n\n";
  u << "## Network information\n" << doc.network_info << "\n\n";
  u << "## Monitoring data\n" << doc.monitoring_data << "\n\n";
  u << "## Source of violation template\n" << source_template() << "\n\n";
  u << "## Recommended action template\n" << action_template() << "\n\n";
  int n = 1;
  for (const auto& ex : doc.few_shot) {
    u << "## Example " << n++ << " (" << ex.name << ")\n";
    u << "Input: " << dump_canonical(ex.input) << "\n";
    u << "Answer: " << dump_canonical(ex.output) << "\n\n";
  }
  u << "## Task\nReturn one JSON object with the keys \"source\" and \"actions\".\n";
  doc.user = u.str();
  doc.token_estimate = estimate_tokens(doc.narrative.size() + doc.user.size());
  return doc;
}

}  // namespace icsim
