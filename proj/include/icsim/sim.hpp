#pragma once

// Discrete-event simulation of closed-loop users driving a service chain
// across the continuum. Single-threaded; every random draw comes from one
// seeded generator so a (scenario, decider, seed) triple replays exactly.

#include "icsim/actuator.hpp"
#include "icsim/hpa.hpp"
#include "icsim/mano.hpp"
#include "icsim/routing.hpp"
#include "icsim/scenario.hpp"
#include "icsim/telemetry.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace icsim {

class LinkFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Link state and background traffic over time.
class NetworkState {
 public:
  explicit NetworkState(Topology topo, double residual_floor = 0.1)
      : topo_(std::move(topo)), floor_(residual_floor) {}

  void inject(const BackgroundFlow& f) {
    for (const auto& k : f.links)
      if (!topo_.find_link(k)) throw std::invalid_argument("inject: unknown link " + k.name());
    background_.push_back(f);
  }

  void set_link(const LinkKey& k, bool up) {
    Link* l = topo_.find_link(k);
    if (!l) throw std::invalid_argument("set_link: unknown link " + k.name());
    l->up = up;
  }

  /// Background rate (Mb/s) active on a link at time t; flows cover [start, end).
  double background(const LinkKey& k, double t) const {
    double r = 0.0;
    for (const auto& f : background_)
      if (t >= f.start && t < f.end && std::find(f.links.begin(), f.links.end(), k) != f.links.end()) r += f.rate;
    return r;
  }

  double residual(const LinkKey& k, double t) const {
    const Link* l = topo_.find_link(k);
    if (!l) throw std::invalid_argument("residual: unknown link " + k.name());
    return std::max(l->capacity - background(k, t), floor_);
  }

  const Topology& topology() const { return topo_; }
  double residual_floor() const { return floor_; }

 private:
  Topology topo_;
  double floor_;
  std::vector<BackgroundFlow> background_;
};

inline double payload_megabits(double payload_kb) { return payload_kb * 8.0 / 1000.0; }

/// Σ payload / residual + Σ latency over the route's links. A single-switch
/// route costs nothing. Throws LinkFailure if any link is down.
inline double transfer_time(const Path& route, double payload_kb, double t, const NetworkState& net) {
  const double mb = payload_megabits(payload_kb);
  double total = 0.0;
  for (const auto& k : path_links(route)) {
    const Link* l = net.topology().find_link(k);
    if (!l) throw LinkFailure("no link " + k.name());
    if (!l->up) throw LinkFailure("link " + k.name() + " is down");
    total += mb / net.residual(k, t) + l->latency / 1000.0;
  }
  return total;
}

/// Time to serve `work` core-seconds under `limit` cores; processor sharing
/// divides the limit among `concurrent` jobs.
inline double service_time(double work, double limit, int concurrent = 1,
                           QueueDiscipline d = QueueDiscipline::Fifo) {
  if (!(limit > 0.0)) throw std::invalid_argument("service_time: limit must be positive");
  if (d == QueueDiscipline::ProcessorSharing) return work * std::max(concurrent, 1) / limit;
  return work / limit;
}

struct StageTiming {
  std::string pod;
  std::string replica;
  std::string node;
  double transfer = 0.0;  // into this stage, including retries
  double queue = 0.0;
  double service = 0.0;
};

struct RequestRecord {
  long id = 0;
  int user = 0;
  double arrival = 0.0;
  double completion = 0.0;
  double rt = 0.0;
  double ema_after = 0.0;
  std::vector<StageTiming> stages;
  double return_transfer = 0.0;
  bool failed = false;  // timed out on a down link
};

struct Trace {
  std::string scenario;
  std::string decider;
  std::uint64_t seed = 0;
  double duration = 0.0;
  IntentSpec intent;
  double alpha = 0.02;
  double window_len = 10.0;
  std::vector<RequestRecord> requests;  // completion order
  std::vector<TelemetrySample> samples;
  std::vector<ControlEvent> events;
  long admitted = 0;
  long completed = 0;
  DeploymentState final_state;
  double wall_seconds = 0.0;
};

class Simulator {
 public:
  /// `decider` may be null only when the scenario selects the HPA baseline.
  Simulator(ScenarioConfig cfg, DecisionMaker* decider, std::vector<FewShotExample> few_shot = {})
      : cfg_(std::move(cfg)),
        net_(cfg_.topology, cfg_.calibration.residual_floor),
        state_(initial_state(cfg_)),
        rng_(cfg_.seed),
        hpa_mode_(cfg_.decider.kind == DeciderSpec::Kind::Hpa) {
    if (!hpa_mode_) {
      if (!decider) throw std::invalid_argument("Simulator: a decision maker is required");
      ManoConfig mc;
      mc.retry_limit = cfg_.calibration.retry_limit;
      mc.decision_latency = cfg_.intent.decision_latency;
      mc.limits = {cfg_.max_replicas, cfg_.cpu_floor};
      mano_.emplace(*decider, std::move(few_shot), mc);
      label_ = decider->name();
    } else {
      label_ = cfg_.decider.label();
    }
    ema_.alpha = cfg_.telemetry.alpha;
    for (const auto& b : cfg_.background) net_.inject(b);
  }

  Trace run() {
    const auto wall0 = std::chrono::steady_clock::now();
    const double T = cfg_.duration;
    log_.emit(0.0, "run_started",
              {{"scenario", cfg_.name},
               {"decider", label_},
               {"seed", cfg_.seed},
               {"duration", T},
               {"alpha", cfg_.telemetry.alpha},
               {"window_len", cfg_.telemetry.window_len},
               {"intent", intent_json(cfg_.intent)}});
    log_allocation(0.0);
    sync_servers();

    double t = 0.0;
    for (std::size_t i = 0; i < cfg_.load.phases.size(); ++i) {
      push(t, Kind::Phase, static_cast<long>(i));
      t += cfg_.load.phases[i].duration;
    }
    for (std::size_t i = 0; i < cfg_.background.size(); ++i) {
      push(cfg_.background[i].start, Kind::Background, static_cast<long>(i), 1);
      push(cfg_.background[i].end, Kind::Background, static_cast<long>(i), 0);
    }
    for (std::size_t i = 0; i < cfg_.link_changes.size(); ++i)
      push(cfg_.link_changes[i].time, Kind::LinkChange, static_cast<long>(i));
    push(cfg_.telemetry.sample_interval, Kind::Sample);
    if (hpa_mode_) push(cfg_.hpa.sync_period, Kind::HpaTick);

    while (!queue_.empty()) {
      Event e = queue_.top();
      if (e.t > T + 1e-9) break;
      queue_.pop();
      now_ = e.t;
      dispatch(e);
    }
    now_ = T;
    log_.emit(T, "run_finished",
              {{"admitted", admitted_}, {"completed", completed_}, {"open", admitted_ - completed_}});

    Trace tr;
    tr.scenario = cfg_.name;
    tr.decider = label_;
    tr.seed = cfg_.seed;
    tr.duration = T;
    tr.intent = cfg_.intent;
    tr.alpha = cfg_.telemetry.alpha;
    tr.window_len = cfg_.telemetry.window_len;
    tr.requests = std::move(records_);
    tr.samples = std::move(samples_);
    tr.events = log_.events();
    tr.admitted = admitted_;
    tr.completed = completed_;
    tr.final_state = state_;
    tr.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return tr;
  }

  const DeploymentState& state() const { return state_; }
  const NetworkState& network() const { return net_; }

 private:
  enum class Kind : std::uint8_t {
    Phase, Spawn, Issue, HopArrive, HopTimeout, ServiceDone, Sample, DecisionDue, HpaTick, LinkChange, Background
  };

  struct Event {
    double t;
    std::uint64_t seq;
    Kind kind;
    long a;
    std::uint64_t b;
    bool operator>(const Event& o) const { return t != o.t ? t > o.t : seq > o.seq; }
  };

  struct Job {
    long req;
    double remaining;  // core-seconds, processor sharing only
  };

  struct Server {
    std::string id;
    std::string pod;
    std::string node;
    double limit = 1.0;
    double intensity = 1.0;
    double work = 0.0;
    bool active = true;
    std::deque<long> waiting;  // FIFO
    long current = -1;
    std::vector<Job> jobs;  // processor sharing
    double ps_last = 0.0;
    std::uint64_t token = 0;
    double busy_cores = 0.0;
    double used = 0.0;  // core-seconds since the last sample
    double last = 0.0;
  };

  struct Request {
    long id = 0;
    int user = 0;
    double arrival = 0.0;
    std::size_t stage = 0;  // chain position of the next hop; K means the return hop
    std::string at_node;
    int server = -1;
    double enqueued = 0.0;
    RequestRecord rec;
  };

  void push(double t, Kind k, long a = 0, std::uint64_t b = 0) { queue_.push({t, seq_++, k, a, b}); }

  double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  void dispatch(const Event& e) {
    switch (e.kind) {
      case Kind::Phase: on_phase(static_cast<std::size_t>(e.a)); break;
      case Kind::Spawn: on_spawn(e.b); break;
      case Kind::Issue: issue(static_cast<int>(e.a)); break;
      case Kind::HopArrive: on_hop_arrive(e.a); break;
      case Kind::HopTimeout: complete(e.a, true); break;
      case Kind::ServiceDone: on_service_done(static_cast<int>(e.a), e.b); break;
      case Kind::Sample: on_sample(); break;
      case Kind::DecisionDue: on_decision_due(); break;
      case Kind::HpaTick: on_hpa_tick(); break;
      case Kind::LinkChange: on_link_change(static_cast<std::size_t>(e.a)); break;
      case Kind::Background: on_background(static_cast<std::size_t>(e.a), e.b != 0); break;
    }
  }

  // ---- load ----

  void on_phase(std::size_t i) {
    target_users_ = cfg_.load.phases[i].users;
    ++generation_;
    log_.emit(now_, "phase", {{"index", i}, {"users", target_users_}});
    if (target_users_ > active_users_) {
      push(now_, Kind::Spawn, 0, generation_);
      return;
    }
    for (auto it = users_.rbegin(); it != users_.rend() && active_users_ > target_users_; ++it)
      if (*it) {
        *it = false;
        --active_users_;
      }
  }

  void on_spawn(std::uint64_t gen) {
    if (gen != generation_ || active_users_ >= target_users_) return;
    users_.push_back(true);
    ++active_users_;
    issue(static_cast<int>(users_.size()) - 1);
    if (active_users_ < target_users_) push(now_ + 1.0 / cfg_.load.spawn_rate, Kind::Spawn, 0, gen);
  }

  void issue(int user) {
    if (!users_[static_cast<std::size_t>(user)]) return;
    Request r;
    r.id = static_cast<long>(requests_.size());
    r.user = user;
    r.arrival = now_;
    r.at_node = cfg_.topology.ingress_host;
    r.rec.id = r.id;
    r.rec.user = user;
    r.rec.arrival = now_;
    r.rec.stages.resize(cfg_.app.pods.size());
    requests_.push_back(std::move(r));
    ++admitted_;
    begin_hop(requests_.back().id);
  }

  // ---- network hops ----

  int pick_server(const std::string& pod) {
    const auto& reps = state_.replicas.at(pod);
    if (reps.empty()) return -1;
    auto& rr = rr_[pod];
    const auto& rep = reps[rr++ % reps.size()];
    return server_index_.at(rep.replica_id);
  }

  std::optional<Path> route_for(const std::string& src, const std::string& dst) {
    auto it = state_.routes.paths.find({src, dst});
    if (it != state_.routes.paths.end()) return it->second;
    const auto& topo = net_.topology();
    return compute_route(topo, topo.switch_of(src), topo.switch_of(dst), last_link_util_);
  }

  void begin_hop(long id) {
    auto& r = requests_[static_cast<std::size_t>(id)];
    const bool ret = r.stage == cfg_.app.pods.size();
    std::string dst;
    if (ret) {
      dst = cfg_.topology.ingress_host;
    } else {
      const auto& pod = cfg_.app.pods[r.stage];
      r.server = pick_server(pod.id);
      if (r.server < 0) throw std::logic_error("pod " + pod.id + " has no replicas");
      dst = servers_[static_cast<std::size_t>(r.server)].node;
    }
    double& slot = ret ? r.rec.return_transfer : r.rec.stages[r.stage].transfer;
    double dt = 0.0;
    if (dst != r.at_node) {
      auto route = route_for(r.at_node, dst);
      try {
        if (!route) throw LinkFailure("no route");
        dt = transfer_time(*route, cfg_.load.payload_kb, now_, net_);
        for (const auto& k : path_links(*route)) app_mb_[k] += payload_megabits(cfg_.load.payload_kb);
      } catch (const LinkFailure&) {
        // The client gives up; the failed request still counts toward the estimator.
        slot += cfg_.calibration.link_timeout;
        push(now_ + cfg_.calibration.link_timeout, Kind::HopTimeout, id);
        return;
      }
    }
    slot += dt;
    push(now_ + dt, Kind::HopArrive, id);
  }

  void on_hop_arrive(long id) {
    auto& r = requests_[static_cast<std::size_t>(id)];
    if (r.stage == cfg_.app.pods.size()) {
      complete(id);
      return;
    }
    auto& srv = servers_[static_cast<std::size_t>(r.server)];
    r.at_node = srv.node;
    auto& st = r.rec.stages[r.stage];
    st.pod = srv.pod;
    st.replica = srv.id;
    st.node = srv.node;
    r.enqueued = now_;
    enqueue(r.server, id);
  }

  // ---- servers ----

  void touch(Server& s) {
    s.used += (now_ - s.last) * s.busy_cores;
    s.last = now_;
  }

  bool processor_sharing() const { return cfg_.calibration.discipline == QueueDiscipline::ProcessorSharing; }

  void enqueue(int si, long id) {
    auto& s = servers_[static_cast<std::size_t>(si)];
    if (processor_sharing()) {
      ps_advance(s);
      s.jobs.push_back({id, s.work});
      ps_schedule(si);
      return;
    }
    s.waiting.push_back(id);
    if (s.current < 0) fifo_start(si);
  }

  void fifo_start(int si) {
    auto& s = servers_[static_cast<std::size_t>(si)];
    touch(s);
    if (s.waiting.empty()) {
      s.current = -1;
      s.busy_cores = 0.0;
      return;
    }
    s.current = s.waiting.front();
    s.waiting.pop_front();
    auto& r = requests_[static_cast<std::size_t>(s.current)];
    auto& st = r.rec.stages[r.stage];
    st.queue = now_ - r.enqueued;
    st.service = service_time(s.work, s.limit);
    s.busy_cores = s.limit * s.intensity;
    push(now_ + st.service, Kind::ServiceDone, si, ++s.token);
  }

  void ps_advance(Server& s) {
    touch(s);
    if (s.jobs.empty()) return;
    const double each = s.limit / static_cast<double>(s.jobs.size());
    const double dt = now_ - s.ps_last;
    for (auto& j : s.jobs) j.remaining -= dt * each;
    s.ps_last = now_;
  }

  void ps_schedule(int si) {
    auto& s = servers_[static_cast<std::size_t>(si)];
    s.ps_last = now_;
    ++s.token;
    if (s.jobs.empty()) {
      s.busy_cores = 0.0;
      return;
    }
    s.busy_cores = s.limit * s.intensity;
    double min_rem = s.jobs.front().remaining;
    for (const auto& j : s.jobs) min_rem = std::min(min_rem, j.remaining);
    const double dt = std::max(min_rem, 0.0) * static_cast<double>(s.jobs.size()) / s.limit;
    push(now_ + dt, Kind::ServiceDone, si, s.token);
  }

  void finish_stage(long id) {
    auto& r = requests_[static_cast<std::size_t>(id)];
    ++r.stage;
    begin_hop(id);
  }

  void on_service_done(int si, std::uint64_t token) {
    auto& s = servers_[static_cast<std::size_t>(si)];
    if (token != s.token) return;
    if (!processor_sharing()) {
      long done = s.current;
      s.current = -1;
      fifo_start(si);
      finish_stage(done);
      return;
    }
    ps_advance(s);
    std::vector<long> done;
    std::vector<Job> rest;
    for (const auto& j : s.jobs) (j.remaining <= 1e-9 ? done.push_back(j.req) : rest.push_back(j));
    s.jobs = std::move(rest);
    ps_schedule(si);
    for (long id : done) {
      auto& r = requests_[static_cast<std::size_t>(id)];
      auto& st = r.rec.stages[r.stage];
      st.queue = 0.0;
      st.service = now_ - r.enqueued;
      finish_stage(id);
    }
  }

  /// Mirrors the deployment into live servers. Removed replicas drain.
  void sync_servers() {
    std::set<std::string> live;
    for (const auto& pod : cfg_.app.pods) {
      const auto lim = state_.limits.at(pod.id);
      for (const auto& rep : state_.replicas.at(pod.id)) {
        live.insert(rep.replica_id);
        auto it = server_index_.find(rep.replica_id);
        if (it == server_index_.end()) {
          Server s;
          s.id = rep.replica_id;
          s.pod = pod.id;
          s.intensity = pod.cpu_intensity;
          s.work = pod.work_demand;
          s.last = now_;
          server_index_[rep.replica_id] = static_cast<int>(servers_.size());
          servers_.push_back(std::move(s));
          it = server_index_.find(rep.replica_id);
        }
        auto& s = servers_[static_cast<std::size_t>(it->second)];
        s.node = rep.node_id;
        s.limit = lim.cpu;
        s.active = true;
      }
    }
    for (auto& s : servers_)
      if (!live.count(s.id)) s.active = false;
  }

  // ---- completion and control ----

  void complete(long id, bool failed = false) {
    auto& r = requests_[static_cast<std::size_t>(id)];
    r.rec.failed = failed;
    r.rec.completion = now_;
    r.rec.rt = now_ - r.arrival;
    ema_ = ema_update(ema_, r.rec.rt);
    r.rec.ema_after = ema_.value;
    ++completed_;
    rt_sum_ += r.rec.rt;
    ++rt_count_;
    records_.push_back(r.rec);
    const int user = r.user;
    if (users_[static_cast<std::size_t>(user)]) {
      double think = cfg_.load.think_time + (2.0 * uniform01() - 1.0) * cfg_.load.think_jitter;
      push(now_ + std::max(think, 0.0), Kind::Issue, user);
    }
    if (hpa_mode_) return;
    if (auto v = watch_step(now_, ema_, cfg_.intent, loop_, completed_, cfg_.telemetry.min_requests)) {
      loop_.in_flight = true;
      Snapshot snap{net_.topology(), cfg_.app, state_,
                    aggregate(samples_, cfg_.telemetry.window_len, cfg_.telemetry.k_pre, now_),
                    cfg_.telemetry.window_len, ema_.value, cfg_.intent, *v};
      pending_ = mano_->consult(*v, std::move(snap), log_);
      push(pending_->apply_at, Kind::DecisionDue);
    }
  }

  void on_decision_due() {
    if (!pending_) return;
    auto before = state_;
    mano_->apply_pending(*pending_, state_, net_.topology(), cfg_.app, log_, loop_);
    pending_.reset();
    after_change(before);
  }

  void after_change(const DeploymentState& before) {
    if (before.replicas != state_.replicas || before.limits != state_.limits) log_allocation(now_);
    sync_servers();
  }

  void log_allocation(double t) {
    json pods = json::object();
    for (const auto& p : cfg_.app.pods) pods[p.id] = pod_summary(state_, p.id);
    log_.emit(t, "allocation", {{"pods", pods}});
  }

  void on_hpa_tick() {
    std::map<std::string, double> util;
    std::map<std::string, int> current;
    for (const auto& p : cfg_.app.pods) {
      current[p.id] = replica_count(state_, p.id);
      double sum = 0.0;
      int n = 0;
      for (auto it = samples_.rbegin(); it != samples_.rend() && it->time > now_ - cfg_.hpa.metric_window + 1e-9; ++it) {
        auto u = it->pods.find(p.id);
        sum += u == it->pods.end() ? 0.0 : u->second.cpu_utilization;
        ++n;
      }
      util[p.id] = n ? sum / n : 0.0;
    }
    HpaConfig hc = cfg_.hpa;
    hc.target = cfg_.decider.hpa_target;
    auto desired = hpa_decide(util, hc, current, now_, hpa_last_change_);
    auto before = state_;
    for (const auto& [pod, want] : desired) {
      if (want == current[pod]) continue;
      if (apply_logged(HorizontalScaling{pod, want}, state_, net_.topology(), cfg_.app, last_link_util_, log_, now_,
                       "hpa"))
        hpa_last_change_[pod] = now_;
    }
    after_change(before);
    push(now_ + cfg_.hpa.sync_period, Kind::HpaTick);
  }

  void on_link_change(std::size_t i) {
    const auto& c = cfg_.link_changes[i];
    net_.set_link(c.link, c.up);
    log_.emit(now_, "injection", {{"kind", c.up ? "link_up" : "link_down"}, {"link", c.link.name()}});
  }

  void on_background(std::size_t i, bool start) {
    const auto& b = cfg_.background[i];
    json links = json::array();
    for (const auto& k : b.links) links.push_back(k.name());
    json p{{"kind", start ? "background_start" : "background_end"}, {"links", links}, {"rate", b.rate}};
    if (!b.id.empty()) p["id"] = b.id;
    log_.emit(now_, "injection", p);
  }

  void on_sample() {
    const double span = cfg_.telemetry.sample_interval;
    TelemetrySample s;
    s.time = now_;
    s.span = span;
    s.rt_sum = rt_sum_;
    s.rt_count = rt_count_;
    rt_sum_ = 0.0;
    rt_count_ = 0;

    std::map<std::string, double> pod_used, node_used, pod_cap;
    std::map<std::string, long> in_system;
    for (auto& srv : servers_) {
      touch(srv);
      pod_used[srv.pod] += srv.used;
      node_used[srv.node] += srv.used;
      srv.used = 0.0;
      in_system[srv.pod] += static_cast<long>(srv.waiting.size() + srv.jobs.size() + (srv.current >= 0 ? 1 : 0));
    }
    const double payload_mib = cfg_.load.payload_kb / 1024.0;
    for (const auto& p : cfg_.app.pods) {
      const auto lim = state_.limits.at(p.id);
      const double reps = static_cast<double>(replica_count(state_, p.id));
      const double cap = reps * lim.cpu * span;
      PodUsage u;
      u.cpu_utilization = cap > 0.0 ? std::min(pod_used[p.id] / cap, kUtilizationCap) : 0.0;
      u.mem_used = reps * cfg_.calibration.mem_base_fraction * lim.mem + static_cast<double>(in_system[p.id]) * payload_mib;
      s.pods[p.id] = u;
    }
    for (const auto& n : net_.topology().nodes)
      s.nodes[n.id] = std::min(node_used[n.id] / (n.cpu_capacity * span), kUtilizationCap);
    for (const auto& l : net_.topology().links) {
      const auto k = key_of(l);
      double bits = net_.background(k, now_ - 0.5 * span) + app_mb_[k] / span;
      s.links[k] = std::min(bits / l.capacity, kUtilizationCap);
    }
    app_mb_.clear();
    last_link_util_ = s.links;
    samples_.push_back(std::move(s));
    push(now_ + span, Kind::Sample);
  }

  ScenarioConfig cfg_;
  NetworkState net_;
  DeploymentState state_;
  std::mt19937_64 rng_;
  bool hpa_mode_;
  std::string label_;
  std::optional<Mano> mano_;
  EventLog log_;
  LoopState loop_;
  EmaState ema_;
  std::optional<PendingDecision> pending_;

  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;

  std::vector<bool> users_;
  int active_users_ = 0;
  int target_users_ = 0;
  std::uint64_t generation_ = 0;

  std::vector<Request> requests_;
  std::vector<RequestRecord> records_;
  std::vector<Server> servers_;
  std::map<std::string, int> server_index_;
  std::map<std::string, std::size_t> rr_;
  std::map<LinkKey, double> app_mb_;
  LinkUtilization last_link_util_;
  std::vector<TelemetrySample> samples_;
  std::map<std::string, double> hpa_last_change_;
  long admitted_ = 0;
  long completed_ = 0;
  double rt_sum_ = 0.0;
  long rt_count_ = 0;
};

}  // namespace icsim
