#pragma once

// Pluggable decision makers. Each returns raw text; the management loop owns
// parsing, retries and fallback.

#include "icsim/decision.hpp"
#include "icsim/heuristic.hpp"
#include "icsim/prompt.hpp"
#include "icsim/snapshot.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

namespace icsim {

inline constexpr double kModelDecisionLatency = 13.4;  // s charged per model consultation

struct Consultation {
  const Snapshot& snapshot;
  const PromptDocument& prompt;
  int violation_index = 0;
  int attempt = 0;
  std::string feedback;  // validator error from the previous attempt, if any
};

struct RawReply {
  std::string body;
  long token_in = 0;
  long token_out = 0;
  double wall_latency = 0.0;  // s, only non-zero for live endpoints
};

/// Transport, timeout or lookup failure (as opposed to a malformed answer).
class DecisionError : public std::runtime_error {
 public:
  DecisionError(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class DecisionMaker {
 public:
  virtual ~DecisionMaker() = default;
  virtual std::string name() const = 0;
  virtual double default_latency() const = 0;
  virtual RawReply consult(const Consultation& c) = 0;
  virtual bool is_heuristic() const { return false; }
};

class HeuristicDecider final : public DecisionMaker {
 public:
  explicit HeuristicDecider(HeuristicParams params = {}) : params_(params) {}
  std::string name() const override { return "heuristic"; }
  double default_latency() const override { return 0.0; }
  bool is_heuristic() const override { return true; }
  RawReply consult(const Consultation& c) override {
    RawReply r;
    r.body = serialize(heuristic_decide(c.snapshot, c.snapshot.violation, params_));
    r.token_in = c.prompt.token_estimate;
    r.token_out = estimate_tokens(r.body.size());
    return r;
  }

 private:
  HeuristicParams params_;
};

/// Replays recorded answers keyed by violation index. File format: one JSON
/// object per line, {"violation_index": <int>, "body": <string>}.
class FixtureDecider final : public DecisionMaker {
 public:
  explicit FixtureDecider(const std::filesystem::path& file) : path_(file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open fixture file " + file.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("violation_index") || !j.contains("body") ||
          !j["body"].is_string() || !j["violation_index"].is_number_integer())
        throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": malformed fixture record");
      bodies_[j["violation_index"].get<int>()] = j["body"].get<std::string>();
    }
  }

  std::string name() const override { return "fixture:" + path_.filename().string(); }
  double default_latency() const override { return kModelDecisionLatency; }

  const std::string& body(int violation_index) const {
    auto it = bodies_.find(violation_index);
    if (it == bodies_.end())
      throw DecisionError("missing-fixture", "no fixture entry for violation " + std::to_string(violation_index));
    return it->second;
  }

  Decision decide(int violation_index, const SchemaLimits& lim = {}) const {
    return parse_decision(body(violation_index), lim);
  }

  std::size_t size() const { return bodies_.size(); }

  RawReply consult(const Consultation& c) override {
    RawReply r;
    r.body = body(c.violation_index);
    r.token_in = c.prompt.token_estimate;
    r.token_out = estimate_tokens(r.body.size());
    return r;
  }

 private:
  std::filesystem::path path_;
  std::map<int, std::string> bodies_;
};

}  // namespace icsim
