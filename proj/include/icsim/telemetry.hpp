#pragma once

// Response-time estimator, threshold detection, and fixed-length window
// aggregation of raw samples.

#include "icsim/canonical_json.hpp"
#include "icsim/continuum.hpp"
#include "icsim/intent.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace icsim {

struct EmaState {
  double alpha = 0.02;
  double value = 0.0;  // s
  bool initialized = false;
};

/// EMA_t = (1 - alpha) * EMA_{t-1} + alpha * RT_t; the first sample seeds the estimator.
inline EmaState ema_update(EmaState s, double rt) {
  if (!(rt >= 0.0)) throw std::domain_error("ema_update: response time must be non-negative");
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw std::domain_error("ema_update: alpha must lie in (0, 1)");
  if (!s.initialized) {
    s.value = rt;
    s.initialized = true;
  } else {
    s.value = (1.0 - s.alpha) * s.value + s.alpha * rt;
  }
  return s;
}

inline constexpr int kDefaultMinRequests = 5;

/// Pure threshold check. Silent while suppressed, uninitialised, or before
/// `min_requests` completions have been observed.
inline std::optional<Direction> detect(const EmaState& ema, const IntentSpec& intent, double now,
                                       double suppressed_until, long completed = kDefaultMinRequests,
                                       long min_requests = kDefaultMinRequests) {
  if (!ema.initialized || completed < min_requests) return std::nullopt;
  if (now < suppressed_until) return std::nullopt;
  if (ema.value > intent.upper_threshold) return Direction::Upper;
  if (ema.value < intent.lower_threshold) return Direction::Lower;
  return std::nullopt;
}

struct PodUsage {
  double cpu_utilization = 0.0;  // fraction of the pod's aggregate limit
  double mem_used = 0.0;         // MiB
  bool operator==(const PodUsage&) const = default;
};

/// One raw monitoring sample covering (time - span, time].
struct TelemetrySample {
  double time = 0.0;
  double span = 1.0;
  double rt_sum = 0.0;
  long rt_count = 0;
  std::map<std::string, PodUsage> pods;
  std::map<std::string, double> nodes;  // cpu fraction of capacity
  std::map<LinkKey, double> links;      // fraction of capacity
};

inline constexpr double kUtilizationCap = 2.0;

struct MetricsWindow {
  int window_id = 0;
  double start = 0.0;
  double end = 0.0;
  double avg_rt = 0.0;
  long request_count = 0;
  std::map<std::string, PodUsage> pods;
  std::map<std::string, double> nodes;
  std::map<LinkKey, double> links;
};

/// Averages samples stamped in (start, end]. avg_rt is the mean over the
/// requests completed in the span; utilisations are means over samples.
inline MetricsWindow aggregate_span(const std::vector<TelemetrySample>& samples, double start, double end,
                                    int window_id) {
  MetricsWindow w;
  w.window_id = window_id;
  w.start = start;
  w.end = end;
  double rt_sum = 0.0;
  long n = 0;
  constexpr double eps = 1e-9;
  for (const auto& s : samples) {
    if (!(s.time > start + eps && s.time <= end + eps)) continue;
    ++n;
    rt_sum += s.rt_sum;
    w.request_count += s.rt_count;
    for (const auto& [id, u] : s.pods) {
      w.pods[id].cpu_utilization += u.cpu_utilization;
      w.pods[id].mem_used += u.mem_used;
    }
    for (const auto& [id, u] : s.nodes) w.nodes[id] += u;
    for (const auto& [k, u] : s.links) w.links[k] += u;
  }
  if (w.request_count > 0) w.avg_rt = rt_sum / static_cast<double>(w.request_count);
  if (n > 0) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& [_, u] : w.pods) {
      u.cpu_utilization = std::min(u.cpu_utilization * inv, kUtilizationCap);
      u.mem_used *= inv;
    }
    for (auto& [_, u] : w.nodes) u = std::min(u * inv, kUtilizationCap);
    for (auto& [_, u] : w.links) u = std::min(u * inv, kUtilizationCap);
  }
  return w;
}

struct WindowSet {
  std::vector<MetricsWindow> pre;  // oldest first
  MetricsWindow violation;
  bool short_history = false;
};

/// Windows (vt - (j+1)L, vt - jL] for j = k_pre..1 followed by the violation
/// window (vt - L, vt]. Pre-windows reaching before the first sample are
/// dropped and the result is flagged short_history.
inline WindowSet aggregate(const std::vector<TelemetrySample>& samples, double window_len, int k_pre,
                           double violation_time) {
  if (!(window_len > 0.0)) throw std::invalid_argument("aggregate: window_len must be positive");
  if (k_pre < 0) throw std::invalid_argument("aggregate: k_pre must be >= 0");
  double history_start = violation_time;
  for (const auto& s : samples) history_start = std::min(history_start, s.time - s.span);

  WindowSet out;
  const double vstart = violation_time - window_len;
  for (int j = k_pre; j >= 1; --j) {
    const double start = violation_time - (j + 1) * window_len;
    const double end = violation_time - j * window_len;
    if (start < history_start - 1e-9) continue;
    out.pre.push_back(aggregate_span(samples, start, end, 0));
  }
  out.short_history = static_cast<int>(out.pre.size()) < k_pre;
  int id = 0;
  for (auto& w : out.pre) w.window_id = id++;
  out.violation = aggregate_span(samples, vstart, violation_time, id);
  return out;
}

/// Grid-aligned windows [iL, (i+1)L] over [0, horizon]; the last one may be partial.
inline std::vector<MetricsWindow> window_grid(const std::vector<TelemetrySample>& samples, double window_len,
                                              double horizon) {
  std::vector<MetricsWindow> out;
  int id = 0;
  for (double start = 0.0; start < horizon - 1e-9; start += window_len, ++id) {
    double end = std::min(start + window_len, horizon);
    out.push_back(aggregate_span(samples, start, end, id));
  }
  return out;
}

inline json to_json(const MetricsWindow& w) {
  json j;
  j["window_id"] = w.window_id;
  j["start"] = w.start;
  j["end"] = w.end;
  j["avg_rt"] = w.avg_rt;
  j["request_count"] = w.request_count;
  json pods = json::object();
  for (const auto& [id, u] : w.pods) pods[id] = {{"cpu_utilization", u.cpu_utilization}, {"mem_used", u.mem_used}};
  j["pods"] = pods;
  json nodes = json::object();
  for (const auto& [id, u] : w.nodes) nodes[id] = {{"cpu_utilization", u}};
  j["nodes"] = nodes;
  json links = json::object();
  for (const auto& [k, u] : w.links) links[k.name()] = {{"utilization", u}};
  j["links"] = links;
  return j;
}

}  // namespace icsim
