#pragma once

// Shared fixtures for the test suites.

#include "icsim/harness.hpp"
#include "icsim/icsim.hpp"

#include <filesystem>
#include <string>

namespace icsim::testing {

inline std::filesystem::path source_dir() { return ICSIM_SOURCE_DIR; }

inline ScenarioConfig computing() { return load_scenario(source_dir() / "scenarios" / "computing.yaml"); }
inline ScenarioConfig networking() { return load_scenario(source_dir() / "scenarios" / "networking.yaml"); }

inline std::filesystem::path fixture(const std::string& name) { return source_dir() / "fixtures" / name; }

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("icsim_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Snapshot of a scenario's initial state with empty monitoring data.
inline Snapshot initial_snapshot(const ScenarioConfig& cfg, Violation v = {}) {
  Snapshot s{cfg.topology, cfg.app, initial_state(cfg), {}, cfg.telemetry.window_len, v.ema_rt, cfg.intent, v};
  return s;
}

}  // namespace icsim::testing
