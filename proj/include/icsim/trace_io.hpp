#pragma once

// Trace directory layout:
//   requests.csv   one row per completed request, completion order
//   telemetry.csv  grid-aligned monitoring windows, one column per metric
//   events.jsonl   control events ordered by (time, seq)
//   summary.json   run metrics derived from the three files above

#include "icsim/canonical_json.hpp"
#include "icsim/mano.hpp"
#include "icsim/metrics.hpp"
#include "icsim/sim.hpp"
#include "icsim/telemetry.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace icsim {

inline constexpr int kSummarySchemaVersion = 1;

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw TraceError("cannot write " + p.string());
  out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw TraceError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string requests_csv(const std::vector<RequestRecord>& reqs) {
  std::string out = "request_id,arrival,completion,rt,ema_after\n";
  for (const auto& r : reqs)
    out += std::to_string(r.id) + "," + fixed6(r.arrival) + "," + fixed6(r.completion) + "," + fixed6(r.rt) + "," +
           fixed6(r.ema_after) + "\n";
  return out;
}

inline std::string telemetry_csv(const std::vector<TelemetrySample>& samples, double window_len, double horizon) {
  const auto windows = window_grid(samples, window_len, horizon);
  std::vector<std::string> pods, nodes;
  std::vector<LinkKey> links;
  if (!samples.empty()) {
    for (const auto& [id, _] : samples.front().pods) pods.push_back(id);
    for (const auto& [id, _] : samples.front().nodes) nodes.push_back(id);
    for (const auto& [k, _] : samples.front().links) links.push_back(k);
  }
  std::string out = "window_id,start,end,avg_rt,request_count";
  for (const auto& p : pods) out += ",pod:" + p + ":cpu,pod:" + p + ":mem";
  for (const auto& n : nodes) out += ",node:" + n + ":cpu";
  for (const auto& k : links) out += ",link:" + k.name() + ":util";
  out += "\n";
  for (const auto& w : windows) {
    out += std::to_string(w.window_id) + "," + fixed6(w.start) + "," + fixed6(w.end) + "," + fixed6(w.avg_rt) + "," +
           std::to_string(w.request_count);
    for (const auto& p : pods) {
      auto it = w.pods.find(p);
      PodUsage u = it == w.pods.end() ? PodUsage{} : it->second;
      out += "," + fixed6(u.cpu_utilization) + "," + fixed6(u.mem_used);
    }
    for (const auto& n : nodes) {
      auto it = w.nodes.find(n);
      out += "," + fixed6(it == w.nodes.end() ? 0.0 : it->second);
    }
    for (const auto& k : links) {
      auto it = w.links.find(k);
      out += "," + fixed6(it == w.links.end() ? 0.0 : it->second);
    }
    out += "\n";
  }
  return out;
}

inline std::string events_jsonl(const std::vector<ControlEvent>& events) {
  std::string out;
  for (const auto& e : events) out += dump_canonical(to_json(e), FloatStyle::Fixed6) + "\n";
  return out;
}

inline std::vector<RequestRow> parse_requests_csv(const std::string& text) {
  std::vector<RequestRow> rows;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("request_id,", 0) != 0) throw TraceError("requests.csv: bad header");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    RequestRow r;
    char c1, c2, c3, c4;
    std::istringstream ls(line);
    if (!(ls >> r.id >> c1 >> r.arrival >> c2 >> r.completion >> c3 >> r.rt >> c4 >> r.ema_after) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',')
      throw TraceError("requests.csv:" + std::to_string(lineno) + ": malformed row");
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<json> parse_events_jsonl(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("time") || !j.contains("seq") || !j.contains("kind"))
      throw TraceError("events.jsonl:" + std::to_string(lineno) + ": malformed event");
    out.push_back(std::move(j));
  }
  return out;
}

/// Run metrics from parsed trace rows. Deterministic: identical inputs give
/// byte-identical canonical output.
inline json compute_summary(const std::vector<RequestRow>& rows, const std::vector<json>& events) {
  json started, finished;
  for (const auto& e : events) {
    if (e["kind"] == "run_started") started = e["payload"];
    if (e["kind"] == "run_finished") finished = e["payload"];
  }
  if (started.is_null() || finished.is_null()) throw TraceError("events.jsonl: missing run_started/run_finished");

  const double duration = started["duration"].get<double>();
  IntentSpec intent;
  intent.upper_threshold = started["intent"]["upper_threshold"].get<double>();
  intent.lower_threshold = started["intent"]["lower_threshold"].get<double>();
  intent.waiting_time = started["intent"]["waiting_time"].get<double>();

  const auto sat = intent_satisfaction(rows, duration, intent);

  long vio_up = 0, vio_low = 0, decisions = 0, fallbacks = 0, applied = 0, skipped = 0, ups = 0, downs = 0;
  long tok_in = 0, tok_out = 0;
  double wall = 0.0;
  std::map<long, double> latency_by_index;
  std::map<std::string, std::vector<AllocationPoint>> alloc;
  for (const auto& e : events) {
    const auto& kind = e["kind"].get_ref<const std::string&>();
    const auto& p = e["payload"];
    const double t = e["time"].get<double>();
    if (kind == "violation") (p["direction"] == "upper" ? vio_up : vio_low)++;
    else if (kind == "decision_requested") ++decisions;
    else if (kind == "fallback") ++fallbacks;
    else if (kind == "action_skipped") ++skipped;
    else if (kind == "action_applied") {
      ++applied;
      const long d = p.value("replica_delta", 0L);
      if (d > 0) ++ups;
      if (d < 0) ++downs;
    } else if (kind == "decision_received") {
      tok_in += p["token_in"].get<long>();
      tok_out += p["token_out"].get<long>();
      wall += p["wall_latency"].get<double>();
      latency_by_index[p["index"].get<long>()] = p["latency"].get<double>();
    } else if (kind == "allocation") {
      for (const auto& [pod, v] : p["pods"].items()) {
        const double reps = static_cast<double>(v["replicas"].size());
        alloc[pod].push_back({t, reps * v["cpu_limit"].get<double>(), reps * v["mem_limit"].get<double>()});
      }
    }
  }
  double lat_sum = 0.0, lat_max = 0.0;
  for (const auto& [_, l] : latency_by_index) {
    lat_sum += l;
    lat_max = std::max(lat_max, l);
  }
  json norm_cpu = json::object(), norm_mem = json::object();
  for (const auto& [pod, hist] : alloc) {
    auto n = normalized_resources(hist, duration);
    norm_cpu[pod] = n.cpu;
    norm_mem[pod] = n.mem;
  }
  double rt_sum = 0.0;
  for (const auto& r : rows) rt_sum += r.rt;

  json s;
  s["schema_version"] = kSummarySchemaVersion;
  s["scenario"] = started["scenario"];
  s["decider"] = started["decider"];
  s["seed"] = started["seed"];
  s["duration"] = duration;
  s["intent"] = started["intent"];
  s["intent_satisfaction"] = sat.percent;
  s["violated_time"] = sat.violated_time;
  s["violated_time_by_direction"] = {{"upper", sat.above}, {"lower", sat.below}};
  s["violations"] = {{"upper", vio_up}, {"lower", vio_low}, {"total", vio_up + vio_low}};
  s["decisions"] = decisions;
  s["fallbacks"] = fallbacks;
  s["actions_applied"] = applied;
  s["actions_skipped"] = skipped;
  s["scale_ups"] = ups;
  s["scale_downs"] = downs;
  s["token_in"] = tok_in;
  s["token_out"] = tok_out;
  const double nlat = static_cast<double>(latency_by_index.size());
  s["decision_latency"] = {{"count", latency_by_index.size()}, {"mean", nlat > 0 ? lat_sum / nlat : 0.0},
                           {"max", lat_max}};
  s["wall_latency"] = wall;
  s["normalized_cpu"] = norm_cpu;
  s["normalized_mem"] = norm_mem;
  s["mean_rt"] = rows.empty() ? 0.0 : rt_sum / static_cast<double>(rows.size());
  s["requests"] = {{"admitted", finished["admitted"]}, {"completed", finished["completed"]}, {"open", finished["open"]}};
  return s;
}

inline std::string summary_text(const json& summary) { return dump_canonical(summary, FloatStyle::Fixed6) + "\n"; }

/// Writes the four trace files and returns the summary.
inline json write_trace(const std::filesystem::path& dir, const Trace& tr) {
  std::filesystem::create_directories(dir);
  const auto req = requests_csv(tr.requests);
  const auto ev = events_jsonl(tr.events);
  write_text(dir / "requests.csv", req);
  write_text(dir / "telemetry.csv", telemetry_csv(tr.samples, tr.window_len, tr.duration));
  write_text(dir / "events.jsonl", ev);
  auto summary = compute_summary(parse_requests_csv(req), parse_events_jsonl(ev));
  write_text(dir / "summary.json", summary_text(summary));
  return summary;
}

/// Consistency check of a trace directory. Returns every problem found.
inline std::vector<std::string> verify_trace(const std::filesystem::path& dir) {
  std::vector<std::string> issues;
  for (const char* f : {"requests.csv", "telemetry.csv", "events.jsonl", "summary.json"})
    if (!std::filesystem::exists(dir / f)) issues.push_back(std::string("missing ") + f);
  if (!issues.empty()) return issues;
  try {
    const auto rows = parse_requests_csv(read_text(dir / "requests.csv"));
    const auto events = parse_events_jsonl(read_text(dir / "events.jsonl"));

    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].completion < rows[i - 1].completion) {
        issues.push_back("requests.csv: rows not in completion order at id " + std::to_string(rows[i].id));
        break;
      }
    for (const auto& r : rows)
      if (std::abs(r.completion - r.arrival - r.rt) > 2e-6) {
        issues.push_back("requests.csv: rt != completion - arrival for id " + std::to_string(r.id));
        break;
      }
    for (std::size_t i = 1; i < events.size(); ++i) {
      const double t0 = events[i - 1]["time"].get<double>(), t1 = events[i]["time"].get<double>();
      if (t1 < t0 || events[i]["seq"].get<long>() <= events[i - 1]["seq"].get<long>()) {
        issues.push_back("events.jsonl: not ordered by (time, seq) at line " + std::to_string(i + 1));
        break;
      }
    }
    // Re-run the estimator from the rt column; rounding to 6 decimals bounds the drift.
    double alpha = 0.02;
    for (const auto& e : events)
      if (e["kind"] == "run_started") alpha = e["payload"]["alpha"].get<double>();
    EmaState ema;
    ema.alpha = alpha;
    for (const auto& r : rows) {
      ema = ema_update(ema, r.rt);
      if (std::abs(ema.value - r.ema_after) > 1e-4) {
        issues.push_back("requests.csv: ema_after inconsistent at id " + std::to_string(r.id));
        break;
      }
    }
    const auto expect = summary_text(compute_summary(rows, events));
    if (expect != read_text(dir / "summary.json")) issues.push_back("summary.json does not match recomputation");
  } catch (const std::exception& e) {
    issues.push_back(e.what());
  }
  return issues;
}

}  // namespace icsim
