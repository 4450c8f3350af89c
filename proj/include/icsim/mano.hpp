#pragma once

// Intent-driven management loop: watch the estimator, ask a decision maker
// on violation, apply what it proposes, then hold off for the waiting time.

#include "icsim/actuator.hpp"
#include "icsim/canonical_json.hpp"
#include "icsim/decider.hpp"
#include "icsim/heuristic.hpp"
#include "icsim/prompt.hpp"
#include "icsim/snapshot.hpp"
#include "icsim/telemetry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace icsim {

struct ControlEvent {
  double time = 0.0;
  std::uint64_t seq = 0;
  std::string kind;
  json payload = json::object();
};

inline json to_json(const ControlEvent& e) {
  return {{"time", e.time}, {"seq", e.seq}, {"kind", e.kind}, {"payload", e.payload}};
}

/// Append-only control log; seq breaks ties between events at the same time.
class EventLog {
 public:
  void emit(double time, std::string kind, json payload = json::object()) {
    events_.push_back({time, seq_++, std::move(kind), std::move(payload)});
  }
  const std::vector<ControlEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

 private:
  std::vector<ControlEvent> events_;
  std::uint64_t seq_ = 0;
};

struct LoopState {
  double suppressed_until = 0.0;
  bool in_flight = false;
  int violations = 0;
};

/// Trigger check for one estimator update. Returns the violation to handle,
/// or nothing while a decision is pending or detection is suppressed.
inline std::optional<Violation> watch_step(double now, const EmaState& ema, const IntentSpec& intent,
                                           const LoopState& loop, long completed,
                                           long min_requests = kDefaultMinRequests) {
  if (loop.in_flight) return std::nullopt;
  auto dir = detect(ema, intent, now, loop.suppressed_until, completed, min_requests);
  if (!dir) return std::nullopt;
  return Violation{*dir, now, ema.value, loop.violations};
}

struct DetectionEvent {
  double time = 0.0;
  std::string kind;  // "violation" or "waiting_started"
  Direction direction = Direction::Upper;
  double ema = 0.0;               // estimator at the trigger; 0 for waiting_started
  double suppressed_until = 0.0;  // in force when the event was emitted
  bool operator==(const DetectionEvent&) const = default;
};

/// Drives the watch loop over (completion time, rt) pairs with no actuation:
/// each trigger is answered `latency` seconds later and then suppressed for
/// the waiting time. Completions must be in time order.
inline std::vector<DetectionEvent> replay_detection(const std::vector<std::pair<double, double>>& completions,
                                                    const IntentSpec& intent, double alpha, double latency = 0.0,
                                                    long min_requests = kDefaultMinRequests) {
  std::vector<DetectionEvent> out;
  EmaState ema;
  ema.alpha = alpha;
  LoopState loop;
  double apply_at = 0.0;
  long completed = 0;
  auto settle = [&](double now) {
    if (loop.in_flight && now >= apply_at) {
      loop.in_flight = false;
      loop.suppressed_until = apply_at + intent.waiting_time;
      ++loop.violations;
      out.push_back({apply_at, "waiting_started", out.back().direction, 0.0, loop.suppressed_until});
    }
  };
  for (const auto& [t, rt] : completions) {
    settle(t);
    ema = ema_update(ema, rt);
    ++completed;
    if (auto v = watch_step(t, ema, intent, loop, completed, min_requests)) {
      out.push_back({t, "violation", v->direction, ema.value, loop.suppressed_until});
      loop.in_flight = true;
      apply_at = t + latency;
      settle(t);
    }
  }
  return out;
}

struct ManoConfig {
  int retry_limit = 2;
  std::optional<double> decision_latency;  // overrides the decider's default
  SchemaLimits limits;
  HeuristicParams heuristic;
};

struct Attempt {
  int attempt = 0;
  std::string body;
  long token_in = 0;
  long token_out = 0;
  double wall_latency = 0.0;
  std::string error;  // empty when the body parsed
};

/// Outcome of a consultation, held until the simulated decision latency elapses.
struct PendingDecision {
  Violation violation;
  Snapshot snapshot;
  long prompt_tokens = 0;
  std::vector<Attempt> attempts;
  std::optional<Decision> decision;  // unset when every attempt failed
  double requested_at = 0.0;
  double apply_at = 0.0;
};

inline json pod_summary(const DeploymentState& s, const std::string& pod) {
  json nodes = json::array();
  if (auto it = s.replicas.find(pod); it != s.replicas.end())
    for (const auto& r : it->second) nodes.push_back(r.node_id);
  json j{{"replicas", nodes}};
  if (auto it = s.limits.find(pod); it != s.limits.end()) {
    j["cpu_limit"] = it->second.cpu;
    j["mem_limit"] = it->second.mem;
  }
  return j;
}

inline json route_summary(const DeploymentState& s, const FlowId& f) {
  auto it = s.routes.paths.find(f);
  return {{"path", it == s.routes.paths.end() ? json(nullptr) : json(it->second)}};
}

inline int replica_count(const DeploymentState& s, const std::string& pod) {
  auto it = s.replicas.find(pod);
  return it == s.replicas.end() ? 0 : static_cast<int>(it->second.size());
}

/// route_update event listing every flow whose path changed, if any did.
inline void log_route_diff(EventLog& log, double now, const RouteTable& before, const RouteTable& after) {
  if (before == after) return;
  json changes = json::array();
  std::set<FlowId> flows;
  for (const auto& [f, _] : before.paths) flows.insert(f);
  for (const auto& [f, _] : after.paths) flows.insert(f);
  for (const auto& f : flows) {
    auto b = before.paths.find(f);
    auto a = after.paths.find(f);
    json old_p = b == before.paths.end() ? json(nullptr) : json(b->second);
    json new_p = a == after.paths.end() ? json(nullptr) : json(a->second);
    if (old_p != new_p) changes.push_back({{"src", f.src}, {"dst", f.dst}, {"old", old_p}, {"new", new_p}});
  }
  log.emit(now, "route_update", {{"version", after.version}, {"changes", changes}});
}

/// Applies one action and logs the outcome. Returns true when applied.
inline bool apply_logged(const Action& action, DeploymentState& state, const Topology& topo, const Application& app,
                         const LinkUtilization& util, EventLog& log, double now, const std::string& source) {
  auto r = apply(action, state, topo, app, util);
  if (auto* rej = std::get_if<Rejection>(&r)) {
    log.emit(now, "action_skipped",
             {{"source", source}, {"action", to_json(action)}, {"reason", to_string(rej->reason)},
              {"detail", rej->detail}});
    return false;
  }
  auto next = std::get<DeploymentState>(std::move(r));
  json payload{{"source", source}, {"action", to_json(action)}};
  if (const auto* f = std::get_if<FlowScheduling>(&action)) {
    payload["before"] = route_summary(state, f->flow);
    payload["after"] = route_summary(next, f->flow);
    payload["replica_delta"] = 0;
  } else {
    const std::string pod = std::visit([](const auto& a) -> std::string {
      if constexpr (requires { a.pod; }) return a.pod;
      else return {};
    }, action);
    payload["pod"] = pod;
    payload["before"] = pod_summary(state, pod);
    payload["after"] = pod_summary(next, pod);
    payload["replica_delta"] = replica_count(next, pod) - replica_count(state, pod);
  }
  log.emit(now, "action_applied", payload);
  log_route_diff(log, now, state.routes, next.routes);
  state = std::move(next);
  return true;
}

class Mano {
 public:
  Mano(DecisionMaker& decider, std::vector<FewShotExample> few_shot, ManoConfig cfg = {})
      : decider_(decider), few_shot_(std::move(few_shot)), cfg_(cfg) {}

  double decision_latency() const { return cfg_.decision_latency.value_or(decider_.default_latency()); }
  const DecisionMaker& decider() const { return decider_; }

  /// Consults the decider (with bounded re-asks on malformed answers). Only
  /// the request itself is logged now; replies are logged when applied.
  PendingDecision consult(const Violation& v, Snapshot snap, EventLog& log) {
    PendingDecision pd;
    pd.violation = v;
    snap.violation = v;
    pd.requested_at = v.time;
    const auto prompt = build_prompt(snap, few_shot_);
    pd.prompt_tokens = prompt.token_estimate;
    log.emit(v.time, "violation",
             {{"direction", to_string(v.direction)}, {"ema_rt", v.ema_rt}, {"index", v.index}});
    log.emit(v.time, "decision_requested",
             {{"decider", decider_.name()}, {"index", v.index}, {"token_estimate", prompt.token_estimate}});

    std::string feedback;
    for (int attempt = 0; attempt <= cfg_.retry_limit; ++attempt) {
      Attempt a;
      a.attempt = attempt;
      try {
        auto reply = decider_.consult(Consultation{snap, prompt, v.index, attempt, feedback});
        a.body = reply.body;
        a.token_in = reply.token_in;
        a.token_out = reply.token_out;
        a.wall_latency = reply.wall_latency;
        pd.decision = parse_decision(reply.body, cfg_.limits);
      } catch (const SchemaError& e) {
        a.error = std::string("schema: ") + e.what();
      } catch (const DecisionError& e) {
        a.error = e.kind() + ": " + e.what();
      }
      feedback = a.error;
      pd.attempts.push_back(std::move(a));
      if (pd.decision) break;
    }
    pd.apply_at = v.time + decision_latency() * static_cast<double>(pd.attempts.size());
    pd.snapshot = std::move(snap);
    return pd;
  }

  /// Applies a pending decision at pd.apply_at. Falls back to the heuristic on
  /// the same snapshot when nothing usable came back. Returns actions applied.
  int apply_pending(PendingDecision& pd, DeploymentState& state, const Topology& topo, const Application& app,
                    EventLog& log, LoopState& loop) {
    const double now = pd.apply_at;
    for (const auto& a : pd.attempts) {
      json p{{"index", pd.violation.index}, {"attempt", a.attempt}, {"body", a.body}, {"token_in", a.token_in},
             {"token_out", a.token_out}, {"wall_latency", a.wall_latency}, {"decider", decider_.name()},
             {"latency", now - pd.requested_at}};
      if (!a.error.empty()) p["error"] = a.error;
      log.emit(now, "decision_received", p);
    }
    const LinkUtilization& util = pd.snapshot.monitoring.violation.links;
    int applied = 0;
    std::string fallback_reason;
    if (pd.decision) {
      for (const auto& act : pd.decision->actions)
        if (apply_logged(act, state, topo, app, util, log, now, "decider")) ++applied;
      if (applied == 0) fallback_reason = "no applicable action";
    } else {
      fallback_reason = "retries exhausted";
    }
    if (!fallback_reason.empty()) {
      // The heuristic has nothing further to offer when it was the decider.
      auto d = decider_.is_heuristic() ? Decision{} : heuristic_decide(pd.snapshot, pd.violation, cfg_.heuristic);
      log.emit(now, "fallback", {{"index", pd.violation.index}, {"reason", fallback_reason}, {"decision", to_json(d)}});
      for (const auto& act : d.actions)
        if (apply_logged(act, state, topo, app, util, log, now, "fallback")) ++applied;
    }
    auto before = state.routes;
    state.routes = recompute_all_routes(state, topo, app, util);
    log_route_diff(log, now, before, state.routes);

    loop.in_flight = false;
    loop.suppressed_until = now + pd.snapshot.intent.waiting_time;
    ++loop.violations;
    log.emit(now, "waiting_started", {{"index", pd.violation.index}, {"suppressed_until", loop.suppressed_until}});
    return applied;
  }

  /// Synchronous variant: consult and apply in one call, ignoring latency.
  int handle_violation(const Violation& v, Snapshot snap, DeploymentState& state, const Topology& topo,
                       const Application& app, EventLog& log, LoopState& loop) {
    loop.in_flight = true;
    auto pd = consult(v, std::move(snap), log);
    return apply_pending(pd, state, topo, app, log, loop);
  }

 private:
  DecisionMaker& decider_;
  std::vector<FewShotExample> few_shot_;
  ManoConfig cfg_;
};

}  // namespace icsim
