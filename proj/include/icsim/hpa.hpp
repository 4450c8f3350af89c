#pragma once

// Horizontal-pod-autoscaler analog used as the baseline: replica count driven
// by CPU utilisation (measured against the limit) with a scale-down cooldown.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace icsim {

struct HpaConfig {
  double target = 0.7;          // utilisation fraction in (0, 1]
  int min_replicas = 1;
  int max_replicas = 5;
  double cooldown = 300.0;      // s before a scale-down may follow any change
  double sync_period = 15.0;    // s between evaluations
  double metric_window = 60.0;  // s of trailing utilisation averaged per evaluation
};

/// clamp(ceil(current * util / target), min, max)
inline int hpa_desired(double util, double target, int current, int min_replicas = 1, int max_replicas = 5) {
  if (!(target > 0.0 && target <= 1.0)) throw std::invalid_argument("hpa: target must lie in (0, 1]");
  if (util < 0.0) util = 0.0;
  double desired = util == target ? current : std::ceil(static_cast<double>(current) * util / target);
  return static_cast<int>(std::clamp(desired, static_cast<double>(min_replicas), static_cast<double>(max_replicas)));
}

/// One evaluation for a single pod: scale-up immediately, scale-down only
/// once `cooldown` seconds have passed since the last change.
inline int hpa_step(double util, const HpaConfig& cfg, int current, double now, double last_scale_change) {
  int desired = hpa_desired(util, cfg.target, current, cfg.min_replicas, cfg.max_replicas);
  if (desired < current && now - last_scale_change < cfg.cooldown) return current;
  return desired;
}

/// Evaluates every pod; pods missing from `utilization` count as idle.
inline std::map<std::string, int> hpa_decide(const std::map<std::string, double>& utilization, const HpaConfig& cfg,
                                             const std::map<std::string, int>& current_replicas, double now,
                                             const std::map<std::string, double>& last_scale_change) {
  std::map<std::string, int> out;
  for (const auto& [pod, cur] : current_replicas) {
    auto u = utilization.find(pod);
    auto last = last_scale_change.find(pod);
    out[pod] = hpa_step(u == utilization.end() ? 0.0 : u->second, cfg, cur, now,
                        last == last_scale_change.end() ? -cfg.cooldown : last->second);
  }
  return out;
}

}  // namespace icsim
