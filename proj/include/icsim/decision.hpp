#pragma once

// Decision vocabulary exchanged with decision makers: a violation source plus
// an ordered list of corrective actions, with a strict JSON schema.

#include "icsim/canonical_json.hpp"
#include "icsim/continuum.hpp"

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace icsim {

enum class SourceCategory { CpuShortage, MemoryShortage, LinkCongestion, LinkFailure, OverProvisioning, Other };

inline const char* to_string(SourceCategory c) {
  switch (c) {
    case SourceCategory::CpuShortage: return "cpu_shortage";
    case SourceCategory::MemoryShortage: return "memory_shortage";
    case SourceCategory::LinkCongestion: return "link_congestion";
    case SourceCategory::LinkFailure: return "link_failure";
    case SourceCategory::OverProvisioning: return "over_provisioning";
    case SourceCategory::Other: return "other";
  }
  return "other";
}

inline std::optional<SourceCategory> category_from_string(const std::string& s) {
  for (auto c : {SourceCategory::CpuShortage, SourceCategory::MemoryShortage, SourceCategory::LinkCongestion,
                 SourceCategory::LinkFailure, SourceCategory::OverProvisioning, SourceCategory::Other})
    if (s == to_string(c)) return c;
  return std::nullopt;
}

struct ServicePlacement {
  std::string pod;
  std::string target_node;
  bool operator==(const ServicePlacement&) const = default;
};

struct HorizontalScaling {
  std::string pod;
  int replicas = 1;
  bool operator==(const HorizontalScaling&) const = default;
};

struct VerticalScaling {
  std::string pod;
  double cpu_limit = 0.0;  // cores
  double mem_limit = 0.0;  // MiB
  bool operator==(const VerticalScaling&) const = default;
};

struct FlowScheduling {
  FlowId flow;
  Path path;
  bool operator==(const FlowScheduling&) const = default;
};

using Action = std::variant<ServicePlacement, HorizontalScaling, VerticalScaling, FlowScheduling>;

struct Decision {
  SourceCategory category = SourceCategory::Other;
  std::string detail;
  std::vector<Action> actions;
  bool operator==(const Decision&) const = default;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SchemaLimits {
  int max_replicas = kDefaultMaxReplicas;
  double cpu_floor = kDefaultCpuFloor;
};

inline const char* action_type(const Action& a) {
  struct V {
    const char* operator()(const ServicePlacement&) const { return "service_placement"; }
    const char* operator()(const HorizontalScaling&) const { return "horizontal_scaling"; }
    const char* operator()(const VerticalScaling&) const { return "vertical_scaling"; }
    const char* operator()(const FlowScheduling&) const { return "flow_scheduling"; }
  };
  return std::visit(V{}, a);
}

inline json to_json(const Action& a) {
  struct V {
    json operator()(const ServicePlacement& x) const {
      return {{"type", "service_placement"}, {"pod", x.pod}, {"target_node", x.target_node}};
    }
    json operator()(const HorizontalScaling& x) const {
      return {{"type", "horizontal_scaling"}, {"pod", x.pod}, {"replicas", x.replicas}};
    }
    json operator()(const VerticalScaling& x) const {
      return {{"type", "vertical_scaling"}, {"pod", x.pod}, {"cpu_limit", x.cpu_limit}, {"mem_limit", x.mem_limit}};
    }
    json operator()(const FlowScheduling& x) const {
      return {{"type", "flow_scheduling"}, {"flow", {{"src", x.flow.src}, {"dst", x.flow.dst}}}, {"path", x.path}};
    }
  };
  return std::visit(V{}, a);
}

inline json to_json(const Decision& d) {
  json actions = json::array();
  for (const auto& a : d.actions) actions.push_back(to_json(a));
  json src{{"category", to_string(d.category)}};
  if (!d.detail.empty()) src["detail"] = d.detail;
  return {{"source", src}, {"actions", actions}};
}

/// Full-precision JSON text; parse_decision(serialize(d)) == d.
inline std::string serialize(const Decision& d) { return to_json(d).dump(); }

namespace detail {

inline void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw SchemaError(where + ": unknown field '" + it.key() + "'");
  for (const auto& k : ok)
    if (!j.contains(k)) throw SchemaError(where + ": missing field '" + k + "'");
}

inline std::string get_id(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_string() || v.get<std::string>().empty())
    throw SchemaError(where + ": '" + key + "' must be a non-empty string");
  return v.get<std::string>();
}

inline double get_number(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw SchemaError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

inline Action parse_action(const json& j, const SchemaLimits& lim, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": action must be an object");
  if (!j.contains("type") || !j["type"].is_string()) throw SchemaError(where + ": missing action type");
  const auto type = j["type"].get<std::string>();
  if (type == "service_placement") {
    require_keys(j, {"type", "pod", "target_node"}, where);
    return ServicePlacement{get_id(j, "pod", where), get_id(j, "target_node", where)};
  }
  if (type == "horizontal_scaling") {
    require_keys(j, {"type", "pod", "replicas"}, where);
    const auto& r = j["replicas"];
    if (!r.is_number_integer() && !r.is_number_unsigned())
      throw SchemaError(where + ": 'replicas' must be an integer");
    auto n = r.get<long long>();
    if (n < 1 || n > lim.max_replicas)
      throw SchemaError(where + ": replicas " + std::to_string(n) + " outside [1, " +
                        std::to_string(lim.max_replicas) + "]");
    return HorizontalScaling{get_id(j, "pod", where), static_cast<int>(n)};
  }
  if (type == "vertical_scaling") {
    require_keys(j, {"type", "pod", "cpu_limit", "mem_limit"}, where);
    double cpu = get_number(j, "cpu_limit", where);
    double mem = get_number(j, "mem_limit", where);
    if (!(cpu >= lim.cpu_floor - kCapacityEps)) throw SchemaError(where + ": cpu_limit below floor");
    if (!(mem > 0.0)) throw SchemaError(where + ": mem_limit must be positive");
    return VerticalScaling{get_id(j, "pod", where), cpu, mem};
  }
  if (type == "flow_scheduling") {
    require_keys(j, {"type", "flow", "path"}, where);
    const auto& f = j["flow"];
    if (!f.is_object()) throw SchemaError(where + ": 'flow' must be an object");
    require_keys(f, {"src", "dst"}, where + ".flow");
    const auto& p = j["path"];
    if (!p.is_array() || p.empty()) throw SchemaError(where + ": 'path' must be a non-empty array");
    Path path;
    for (const auto& s : p) {
      if (!s.is_string() || s.get<std::string>().empty()) throw SchemaError(where + ": path entries must be switch ids");
      path.push_back(s.get<std::string>());
    }
    return FlowScheduling{{get_id(f, "src", where), get_id(f, "dst", where)}, std::move(path)};
  }
  throw SchemaError(where + ": unknown action type '" + type + "'");
}

}  // namespace detail

/// Locates the first balanced {...} block in `text` that parses as JSON.
/// Live models tend to wrap the object in prose or code fences.
inline std::optional<json> extract_first_object(const std::string& text) {
  for (std::size_t start = text.find('{'); start != std::string::npos; start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_str = false, esc = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_str) {
        if (esc) esc = false;
        else if (c == '\\') esc = true;
        else if (c == '"') in_str = false;
        continue;
      }
      if (c == '"') in_str = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        auto j = json::parse(text.begin() + start, text.begin() + i + 1, nullptr, false);
        if (!j.is_discarded() && j.is_object()) return j;
        break;
      }
    }
  }
  return std::nullopt;
}

inline Decision decision_from_json(const json& j, const SchemaLimits& lim = {}) {
  if (!j.is_object()) throw SchemaError("decision must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "source" && it.key() != "actions") throw SchemaError("unknown field '" + it.key() + "'");

  Decision d;
  if (j.contains("actions")) {
    const auto& acts = j["actions"];
    if (!acts.is_array()) throw SchemaError("'actions' must be an array");
    for (std::size_t i = 0; i < acts.size(); ++i)
      d.actions.push_back(detail::parse_action(acts[i], lim, "actions[" + std::to_string(i) + "]"));
  }
  if (!j.contains("source")) throw SchemaError("missing 'source'");
  const auto& src = j["source"];
  if (!src.is_object()) throw SchemaError("'source' must be an object");
  for (auto it = src.begin(); it != src.end(); ++it)
    if (it.key() != "category" && it.key() != "detail") throw SchemaError("source: unknown field '" + it.key() + "'");
  if (!src.contains("category") || !src["category"].is_string()) throw SchemaError("source: missing category");
  auto cat = category_from_string(src["category"].get<std::string>());
  if (!cat) throw SchemaError("source: unknown category '" + src["category"].get<std::string>() + "'");
  d.category = *cat;
  if (src.contains("detail")) {
    if (!src["detail"].is_string()) throw SchemaError("source: 'detail' must be a string");
    d.detail = src["detail"].get<std::string>();
  }
  return d;
}

/// Strict parse of the first well-formed object found in free text.
inline Decision parse_decision(const std::string& text, const SchemaLimits& lim = {}) {
  auto j = extract_first_object(text);
  if (!j) throw SchemaError("no JSON object found in response");
  return decision_from_json(*j, lim);
}

}  // namespace icsim
