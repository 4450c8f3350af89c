#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace icsim {

/// Response-time band the management loop keeps the application inside.
struct IntentSpec {
  double upper_threshold = 3.0;  // s
  double lower_threshold = 1.0;  // s
  double waiting_time = 60.0;    // s of suppressed detection after each correction
  // Simulated time charged per consultation; unset means the decider's default.
  std::optional<double> decision_latency;

  void validate() const {
    if (!(lower_threshold >= 0.0) || !(lower_threshold < upper_threshold))
      throw std::invalid_argument("intent: need 0 <= lower < upper");
    if (!(waiting_time >= 0.0)) throw std::invalid_argument("intent: waiting_time must be >= 0");
    if (decision_latency && !(*decision_latency >= 0.0))
      throw std::invalid_argument("intent: decision_latency must be >= 0");
  }
};

enum class Direction { Upper, Lower };

inline const char* to_string(Direction d) { return d == Direction::Upper ? "upper" : "lower"; }

struct Violation {
  Direction direction = Direction::Upper;
  double time = 0.0;    // s
  double ema_rt = 0.0;  // s, estimator value at detection
  int index = 0;        // 0-based ordinal within the run
};

}  // namespace icsim
