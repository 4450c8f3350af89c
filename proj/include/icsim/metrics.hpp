#pragma once

// Run-level metrics computed from trace rows, so the same code serves live
// runs and re-verification of a written trace directory.

#include "icsim/canonical_json.hpp"
#include "icsim/intent.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace icsim {

struct RequestRow {
  long id = 0;
  double arrival = 0.0;
  double completion = 0.0;
  double rt = 0.0;
  double ema_after = 0.0;
};

struct Satisfaction {
  double percent = 100.0;
  double violated_time = 0.0;  // s, above + below
  double above = 0.0;          // s with EMA > upper
  double below = 0.0;          // s with EMA < lower
};

/// The estimator is piecewise constant between completions (rows must be in
/// completion order). Violated time accrues from the first completion to the
/// horizon; the denominator is the whole run.
inline Satisfaction intent_satisfaction(const std::vector<RequestRow>& rows, double duration,
                                        const IntentSpec& intent) {
  Satisfaction s;
  if (!(duration > 0.0)) return s;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double start = std::clamp(rows[i].completion, 0.0, duration);
    const double end = i + 1 < rows.size() ? std::clamp(rows[i + 1].completion, 0.0, duration) : duration;
    const double dt = std::max(end - start, 0.0);
    const double v = rows[i].ema_after;
    if (v > intent.upper_threshold) s.above += dt;
    else if (v < intent.lower_threshold) s.below += dt;
  }
  s.violated_time = s.above + s.below;
  s.percent = 100.0 * (duration - s.violated_time) / duration;
  return s;
}

/// One step of a pod's allocation history.
struct AllocationPoint {
  double time = 0.0;
  double cpu = 0.0;  // replicas * cpu_limit
  double mem = 0.0;  // replicas * mem_limit
};

struct NormalizedResources {
  double cpu = 0.0;  // cores
  double mem = 0.0;  // MiB
};

/// Time-weighted mean allocation over [0, duration]. Each point holds until
/// the next one; the first holds from time zero.
inline NormalizedResources normalized_resources(const std::vector<AllocationPoint>& history, double duration) {
  NormalizedResources out;
  if (history.empty() || !(duration > 0.0)) return out;
  double cpu = 0.0, mem = 0.0;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double start = i == 0 ? 0.0 : std::clamp(history[i].time, 0.0, duration);
    const double end = i + 1 < history.size() ? std::clamp(history[i + 1].time, 0.0, duration) : duration;
    cpu += history[i].cpu * std::max(end - start, 0.0);
    mem += history[i].mem * std::max(end - start, 0.0);
  }
  out.cpu = cpu / duration;
  out.mem = mem / duration;
  return out;
}

/// First time at or after `from` when the estimator is back inside the band
/// and stays there for `hold` seconds (or until the trace ends). Negative if never.
inline double recovery_time(const std::vector<RequestRow>& rows, const IntentSpec& intent, double from,
                            double hold = 0.0) {
  auto inside = [&](double v) { return v <= intent.upper_threshold && v >= intent.lower_threshold; };
  double candidate = -1.0;
  for (const auto& r : rows) {
    if (r.completion < from) continue;
    if (inside(r.ema_after)) {
      if (candidate < 0.0) candidate = r.completion;
    } else {
      if (candidate >= 0.0 && r.completion - candidate >= hold) return candidate;
      candidate = -1.0;
    }
  }
  return candidate;
}

}  // namespace icsim
