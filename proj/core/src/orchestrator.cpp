#include "advsim/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "advsim/comm_attack.hpp"
#include "advsim/dataset.hpp"
#include "advsim/errors.hpp"
#include "advsim/perception_attack.hpp"
#include "advsim/random.hpp"
#include "advsim/world.hpp"

namespace advsim {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

const char* to_string(Role r) {
  switch (r) {
    case Role::traffic: return "traffic";
    case Role::world: return "world";
    case Role::v2x: return "v2x";
  }
  return "?";
}

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::step: return "STEP";
    case MessageKind::state_sync: return "STATE_SYNC";
    case MessageKind::cam_batch: return "CAM_BATCH";
    case MessageKind::ack: return "ACK";
    case MessageKind::shutdown: return "SHUTDOWN";
  }
  return "?";
}

std::vector<VehicleState> sync_states(std::span<const VehicleState> leader, std::span<const VehicleState> follower) {
  std::map<std::string, const VehicleState*> by_id;
  for (const VehicleState& v : leader) by_id.emplace(v.id, &v);

  std::vector<std::string> missing;
  std::vector<std::string> extra;
  std::map<std::string, bool> seen;
  for (const VehicleState& v : follower) {
    if (by_id.count(v.id) == 0) extra.push_back(v.id);
    seen[v.id] = true;
  }
  for (const VehicleState& v : leader) {
    if (seen.count(v.id) == 0) missing.push_back(v.id);
  }
  if (!missing.empty() || !extra.empty()) throw IdMismatchError(std::move(missing), std::move(extra));

  std::vector<VehicleState> out(follower.begin(), follower.end());
  for (VehicleState& v : out) {
    const VehicleState& l = *by_id.at(v.id);
    v.position = l.position;
    v.yaw = l.yaw;
    v.speed = l.speed;
    v.route_progress_m = l.route_progress_m;
  }
  return out;
}

namespace {

TickMessage reply(MessageKind kind, std::size_t tick, TickPayload payload = {}) {
  return {kind, tick, std::move(payload)};
}

const VehicleState& find_state(const std::vector<VehicleState>& states, const std::string& id) {
  for (const VehicleState& v : states) {
    if (v.id == id) return v;
  }
  throw Error("no state for vehicle '" + id + "'");
}

class RoleBase {
 public:
  virtual ~RoleBase() = default;
  virtual TickMessage handle(const TickMessage& m) = 0;
};

// Stand-in for both the traffic simulator and the world simulator: each
// keeps its own copy of the actors and advances them kinematically.
class KinematicRole final : public RoleBase {
 public:
  explicit KinematicRole(const ScenarioConfig& config) : dt_(config.dt_s) {
    for (const VehicleSpec& v : config.vehicles) {
      Route route(v.route, v.loop);
      states_.push_back(spawn_vehicle(v.id, route, v.speed_mps, v.dims));
      routes_.emplace(v.id, std::move(route));
    }
  }

  TickMessage handle(const TickMessage& m) override {
    switch (m.kind) {
      case MessageKind::step:
        if (started_ && m.tick_index <= tick_) {
          throw Error("STEP " + std::to_string(m.tick_index) + " does not advance past " + std::to_string(tick_));
        }
        advance_to(m.tick_index);
        started_ = true;
        return reply(MessageKind::ack, tick_, states_);
      case MessageKind::state_sync:
        states_ = sync_states(std::get<std::vector<VehicleState>>(m.payload), states_);
        return reply(MessageKind::ack, tick_, states_);
      case MessageKind::shutdown:
        advance_to(m.tick_index);
        return reply(MessageKind::ack, tick_);
      default:
        throw Error(std::string("unexpected ") + to_string(m.kind));
    }
  }

 private:
  void advance_to(std::size_t k) {
    while (tick_ < k) {
      states_ = step_traffic(states_, routes_, dt_);
      ++tick_;
    }
  }

  double dt_;
  std::vector<VehicleState> states_;
  std::map<std::string, Route> routes_;
  std::size_t tick_ = 0;
  bool started_ = false;
};

// The V2X role: CAM generation, communication attacks and LDM upkeep.
class V2xRole final : public RoleBase {
 public:
  explicit V2xRole(const ScenarioConfig& config)
      : dt_(config.dt_s), comm_(config.comm), lidar_(config.lidar()), ego_id_(config.ego().id) {
    for (const VehicleSpec& v : config.vehicles) {
      LocalDynamicMap ldm;
      ldm.owner_id = v.id;
      ldm.history_limit = config.comm.ldm_history;
      ldms_.push_back(ldm);
    }
    clean_ldms_ = ldms_;
    for (const AttackSpec& a : config.attacks) {
      switch (a.type) {
        case AttackType::sybil: comm_attacks_.emplace_back(SybilAttack(std::get<SybilParams>(a.params))); break;
        case AttackType::rba: comm_attacks_.emplace_back(RandomBiasAttack(std::get<RbaParams>(a.params))); break;
        case AttackType::paa: comm_attacks_.emplace_back(std::get<PaaParams>(a.params)); break;
        case AttackType::gps_spoof: comm_attacks_.emplace_back(std::get<GpsSpoofParams>(a.params)); break;
        default: break;
      }
    }
  }

  TickMessage handle(const TickMessage& m) override {
    switch (m.kind) {
      case MessageKind::step:
      case MessageKind::shutdown:
        tick_ = m.tick_index;
        return reply(MessageKind::ack, tick_);
      case MessageKind::state_sync:
        return reply(MessageKind::cam_batch, tick_, batch(std::get<std::vector<VehicleState>>(m.payload)));
      default:
        throw Error(std::string("unexpected ") + to_string(m.kind));
    }
  }

 private:
  using CommAttack = std::variant<SybilAttack, RandomBiasAttack, PaaParams, GpsSpoofParams>;

  CamBatch batch(const std::vector<VehicleState>& states) {
    const double t = static_cast<double>(tick_) * dt_;
    const VehicleState& ego = find_state(states, ego_id_);

    // Reported ego pose: every active GPS spoof, in config order.
    Pose reported = ego.pose();
    CamBatch out;
    for (const CommAttack& a : comm_attacks_) {
      if (const auto* g = std::get_if<GpsSpoofParams>(&a)) {
        reported = apply_gps_spoof(reported, *g, t);
        out.attacks_active += g->window.contains(t) ? 1 : 0;
      }
    }
    VehicleState reported_ego = ego;
    reported_ego.position = reported.position;
    reported_ego.yaw = reported.yaw;
    out.true_sensor_pose = sensor_pose(ego, lidar_);
    out.reported_sensor_pose = sensor_pose(reported_ego, lidar_);

    if (is_cam_tick(tick_, dt_, comm_)) {
      out.clean_cams = emit_cams(states, t, comm_);
      std::vector<CamMessage> cams = out.clean_cams;
      if (comm_.enabled) {
        for (CamMessage& c : cams) {
          if (c.station_id == ego_id_) {
            c.position = reported.position;
            c.heading = normalize_angle(reported.yaw);
          }
        }
        for (CommAttack& a : comm_attacks_) {
          if (auto* s = std::get_if<SybilAttack>(&a)) {
            out.attacks_active += s->params().window.contains(t) ? 1 : 0;
            cams = s->apply(std::move(cams), find_state(states, s->params().attacker), t);
          } else if (auto* r = std::get_if<RandomBiasAttack>(&a)) {
            out.attacks_active += r->params().window.contains(t) ? 1 : 0;
            cams = r->apply(std::move(cams), t);
          } else if (const auto* p = std::get_if<PaaParams>(&a)) {
            out.attacks_active += p->window.contains(t) ? 1 : 0;
            cams = apply_paa(std::move(cams), *p, t);
          }
        }
      }
      out.cams = std::move(cams);
      for (std::size_t i = 0; i < ldms_.size(); ++i) {
        const VehicleState& owner = find_state(states, ldms_[i].owner_id);
        ldms_[i] = update_ldm(std::move(ldms_[i]), out.cams, owner, comm_);
        clean_ldms_[i] = update_ldm(std::move(clean_ldms_[i]), out.clean_cams, owner, comm_);
      }
    }
    out.ldms = ldms_;
    out.clean_ldms = clean_ldms_;
    return out;
  }

  double dt_;
  CommSpec comm_;
  SensorSpec lidar_;
  std::string ego_id_;
  std::vector<CommAttack> comm_attacks_;
  std::vector<LocalDynamicMap> ldms_;
  std::vector<LocalDynamicMap> clean_ldms_;
  std::size_t tick_ = 0;
};

struct Envelope {
  Role role = Role::v2x;
  TickMessage message;
  std::exception_ptr error;
  Clock::time_point done{};  // when the role finished handling
};

template <typename T>
class Channel {
 public:
  void send(T value) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(value));
    }
    cv_.notify_one();
  }

  /// Empty on close (once drained) or when the deadline passes.
  std::optional<T> receive(std::optional<Clock::time_point> deadline = std::nullopt) {
    std::unique_lock lock(mu_);
    const auto ready = [&] { return !queue_.empty() || closed_; };
    if (deadline) {
      if (!cv_.wait_until(lock, *deadline, ready)) return std::nullopt;
    } else {
      cv_.wait(lock, ready);
    }
    if (queue_.empty()) return std::nullopt;
    T value = std::move(queue_.front());
    queue_.pop_front();
    return value;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> queue_;
  bool closed_ = false;
};

Envelope invoke(Role role, RoleBase& impl, const TickMessage& m, const SessionOptions& options) {
  Envelope e;
  e.role = role;
  try {
    if (options.fault_hook) options.fault_hook(role, m);
    e.message = impl.handle(m);
  } catch (...) {
    e.error = std::current_exception();
  }
  e.done = Clock::now();
  return e;
}

class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(Role role, TickMessage m) = 0;
  virtual std::optional<Envelope> receive(Clock::time_point deadline) = 0;
};

class SequentialTransport final : public Transport {
 public:
  SequentialTransport(std::array<RoleBase*, 3> roles, const SessionOptions& options)
      : roles_(roles), options_(options) {}

  void send(Role role, TickMessage m) override {
    pending_.push_back(invoke(role, *roles_[static_cast<std::size_t>(role)], m, options_));
  }

  std::optional<Envelope> receive(Clock::time_point deadline) override {
    // Handlers already ran inline in send(); lateness is judged by the
    // coordinator from each envelope's completion time.
    (void)deadline;
    if (pending_.empty()) return std::nullopt;
    Envelope e = std::move(pending_.front());
    pending_.pop_front();
    return e;
  }

 private:
  std::array<RoleBase*, 3> roles_;
  const SessionOptions& options_;
  std::deque<Envelope> pending_;
};

class ThreadedTransport final : public Transport {
 public:
  ThreadedTransport(std::array<RoleBase*, 3> roles, const SessionOptions& options) {
    for (std::size_t i = 0; i < 3; ++i) {
      threads_[i] = std::jthread([this, i, impl = roles[i], &options] {
        const auto role = static_cast<Role>(i);
        while (auto m = inboxes_[i].receive()) {
          outbox_.send(invoke(role, *impl, *m, options));
          if (m->kind == MessageKind::shutdown) break;
        }
      });
    }
  }

  ~ThreadedTransport() override {
    for (auto& inbox : inboxes_) inbox.close();
    for (auto& t : threads_) {
      if (t.joinable()) t.join();
    }
  }

  void send(Role role, TickMessage m) override { inboxes_[static_cast<std::size_t>(role)].send(std::move(m)); }

  std::optional<Envelope> receive(Clock::time_point deadline) override { return outbox_.receive(deadline); }

 private:
  std::array<Channel<TickMessage>, 3> inboxes_;
  Channel<Envelope> outbox_;
  std::array<std::jthread, 3> threads_;
};

class Coordinator {
 public:
  Coordinator(Transport& transport, const SessionOptions& options, double timeout_s)
      : transport_(transport),
        options_(options),
        timeout_(std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(timeout_s))) {}

  void send(Role role, MessageKind kind, std::size_t tick, TickPayload payload = {}) {
    if (!dispatching_) {
      dispatched_ = Clock::now();
      dispatching_ = true;
    }
    transport_.send(role, {kind, tick, std::move(payload)});
  }

  /// Barrier: one reply from each listed role, in any arrival order.
  std::map<Role, TickMessage> collect(std::initializer_list<Role> from, std::size_t tick, MessageKind expected) {
    std::map<Role, TickMessage> got;
    // The timeout runs from the first dispatch of this round.
    const auto deadline = (dispatching_ ? dispatched_ : Clock::now()) + timeout_;
    dispatching_ = false;
    while (got.size() < from.size()) {
      auto e = transport_.receive(deadline);
      if (!e) {
        for (Role r : from) {
          if (got.count(r) == 0) throw RoleTimeoutError(to_string(r), tick);
        }
      }
      if (e->done > deadline) throw RoleTimeoutError(to_string(e->role), tick);
      if (e->error) {
        try {
          std::rethrow_exception(e->error);
        } catch (const std::exception& ex) {
          throw RoleError(to_string(e->role), tick, ex.what());
        } catch (...) {
          throw RoleError(to_string(e->role), tick, "unknown failure");
        }
      }
      if (e->message.kind != expected || e->message.tick_index != tick) {
        throw RoleError(to_string(e->role), tick,
                        std::string("protocol violation: got ") + to_string(e->message.kind) + " for tick " +
                            std::to_string(e->message.tick_index));
      }
      if (options_.observer) {
        ProtocolEvent ev;
        ev.type = ProtocolEvent::Type::ack;
        ev.master_tick = tick;
        ev.role = e->role;
        ev.role_tick = e->message.tick_index;
        options_.observer(ev);
      }
      got.emplace(e->role, std::move(e->message));
    }
    return got;
  }

  void notify(ProtocolEvent ev) {
    if (options_.observer) options_.observer(ev);
  }

 private:
  Transport& transport_;
  const SessionOptions& options_;
  Clock::duration timeout_;
  Clock::time_point dispatched_{};
  bool dispatching_ = false;
};

bool same_kinematics(const std::vector<VehicleState>& a, const std::vector<VehicleState>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id || !(a[i].position == b[i].position) || a[i].yaw != b[i].yaw || a[i].speed != b[i].speed) {
      return false;
    }
  }
  return true;
}

}  // namespace

ordered_json dataset_metadata(const ordered_json& detector, double iou_threshold, std::size_t frames) {
  return {{"format", "advsim-dataset"},
          {"frames", frames},
          {"cloud_layout", "float32 little-endian x y z intensity"},
          {"detector", detector},
          {"iou_threshold", iou_threshold}};
}

DirectorySink::DirectorySink(fs::path dir, const ScenarioConfig& config)
    : dir_(std::move(dir)),
      config_(to_json(config)),
      detector_(to_json(config.detector)),
      iou_threshold_(config.iou_threshold),
      paired_(config.has_attacks() && config.paired_output) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError(dir_, "cannot create output directory");
  if (paired_) {
    fs::create_directories(dir_ / "clean", ec);
    if (ec) throw IoError(dir_ / "clean", "cannot create output directory");
  }
}

void DirectorySink::consume(const FrameBundle& bundle) {
  export_frame(bundle.frame, dir_);
  if (paired_ && bundle.clean) export_frame(*bundle.clean, dir_ / "clean");
  ++frames_;
}

void DirectorySink::finish(const SessionSummary& summary) {
  ordered_json meta = dataset_metadata(detector_, iou_threshold_, frames_);
  meta["sampling_hz"] = 1.0 / config_["dt_s"].get<double>();
  meta["scenario"] = config_;
  meta["session"] = {{"ticks_run", summary.ticks_run},
                     {"frames_emitted", summary.frames_emitted},
                     {"attacks_applied", summary.attacks_applied},
                     {"perception_skips", summary.perception_skips}};
  if (paired_) {
    meta["clean_dir"] = "clean";
    meta["variant"] = "adversarial";
    ordered_json clean_meta = meta;
    clean_meta.erase("clean_dir");
    clean_meta["variant"] = "clean";
    write_metadata(dir_ / "clean", clean_meta);
  } else {
    meta["variant"] = config_["attacks"].empty() ? "clean" : "adversarial";
  }
  write_metadata(dir_, meta);
}

PerceptionOutcome run_perception_attack(const Detector& detector, const AttackSpec& attack, const PointCloud& cloud,
                                        std::span<const BBox3D> gt, std::size_t tick) {
  PerceptionOutcome out;
  switch (attack.type) {
    case AttackType::perturb: {
      if (cloud.empty()) {
        out.skip_reason = "empty cloud";
        return out;
      }
      PerturbParams p = std::get<PerturbParams>(attack.params);
      p.seed = derive_seed(p.seed, "frame", tick);
      out.cloud = perturb_attack(detector, cloud, gt, p).adversarial;
      return out;
    }
    case AttackType::detach: {
      const auto& p = std::get<DetachParams>(attack.params);
      if (detach_budget(cloud.size(), p.drop_ratio) == 0) {
        out.skip_reason = "floor(N x drop_ratio) is 0 for N = " + std::to_string(cloud.size());
        return out;
      }
      out.cloud = detach_attack(detector, cloud, gt, p).adversarial;
      return out;
    }
    case AttackType::attach: {
      AttachParams p = std::get<AttachParams>(attack.params);
      if (p.k > cloud.size()) {
        out.skip_reason = "K = " + std::to_string(p.k) + " exceeds N = " + std::to_string(cloud.size());
        return out;
      }
      p.seed = derive_seed(p.seed, "frame", tick);
      AttachResult r = attach_attack(detector, cloud, gt, p);
      out.cloud = std::move(r.adversarial);
      out.injected_from = std::move(r.initial_positions);
      return out;
    }
    default:
      throw ParameterError(std::string("'") + to_string(attack.type) + "' is not a perception attack");
  }
}

SessionSummary run_session(const ScenarioConfig& config, std::span<FrameSink* const> sinks,
                           const SessionOptions& options) {
  const std::size_t ticks = config.tick_count();
  const double dt = config.dt_s;
  const SensorSpec& lidar = config.lidar();
  const std::string ego_id = config.ego().id;
  const bool paired = config.has_attacks() && config.paired_output;
  const Role leader = config.mode == SyncMode::traffic_driven ? Role::traffic : Role::world;
  const Role follower = leader == Role::traffic ? Role::world : Role::traffic;

  std::optional<SurrogateDetector> detector;
  if (config.has_perception_attacks()) detector.emplace(config.detector);

  KinematicRole traffic(config);
  KinematicRole world(config);
  V2xRole v2x(config);
  const std::array<RoleBase*, 3> roles{&traffic, &world, &v2x};

  const ExecutionMode mode = options.execution.value_or(config.execution);
  std::unique_ptr<Transport> transport;
  if (mode == ExecutionMode::threaded) {
    transport = std::make_unique<ThreadedTransport>(roles, options);
  } else {
    transport = std::make_unique<SequentialTransport>(roles, options);
  }
  Coordinator master(*transport, options, options.barrier_timeout_s.value_or(config.barrier_timeout_s));

  SessionSummary summary;
  const std::initializer_list<Role> kAll{Role::traffic, Role::world, Role::v2x};

  for (std::size_t k = 0; k < ticks; ++k) {
    for (Role r : kAll) {
      master.notify({ProtocolEvent::Type::step_sent, k, r, k});
      master.send(r, MessageKind::step, k);
    }
    auto acks = master.collect(kAll, k, MessageKind::ack);
    const auto leader_states = std::get<std::vector<VehicleState>>(acks.at(leader).payload);

    master.send(follower, MessageKind::state_sync, k, leader_states);
    auto synced = master.collect({follower}, k, MessageKind::ack);
    const auto& follower_states = std::get<std::vector<VehicleState>>(synced.at(follower).payload);
    if (!same_kinematics(leader_states, follower_states)) {
      throw RoleError(to_string(follower), k, "follower state differs from leader after sync");
    }
    ProtocolEvent ev{ProtocolEvent::Type::synced, k, follower, k};
    ev.leader = &leader_states;
    ev.follower = &follower_states;
    master.notify(ev);

    master.send(Role::v2x, MessageKind::state_sync, k, leader_states);
    auto cam = master.collect({Role::v2x}, k, MessageKind::cam_batch);
    auto& batch = std::get<CamBatch>(cam.at(Role::v2x).payload);
    summary.attacks_applied += batch.attacks_active;

    // Simulation logic core: sensor data, ground truth, perception attacks.
    const double t = static_cast<double>(k) * dt;
    const VehicleState& ego = find_state(leader_states, ego_id);
    Rng noise(derive_seed(config.seed, "lidar", k));
    FrameRecord clean;
    clean.tick_index = k;
    clean.sim_time_s = t;
    clean.point_cloud = raycast_lidar(ego, leader_states, lidar, noise);
    clean.gt_boxes = ground_truth_boxes(ego, leader_states, lidar);
    clean.vehicle_states = leader_states;
    clean.cams_emitted = std::move(batch.clean_cams);
    clean.ldms = std::move(batch.clean_ldms);
    clean.ego_to_world = pose_to_transform(batch.true_sensor_pose);

    FrameBundle bundle;
    bundle.frame = clean;
    bundle.frame.cams_emitted = std::move(batch.cams);
    bundle.frame.ldms = std::move(batch.ldms);
    bundle.frame.ego_to_world = pose_to_transform(batch.reported_sensor_pose);
    for (const AttackSpec& a : config.attacks) {
      if (!is_perception_attack(a.type)) continue;
      auto outcome = run_perception_attack(*detector, a, bundle.frame.point_cloud, clean.gt_boxes, k);
      if (outcome.cloud) {
        bundle.frame.point_cloud = std::move(*outcome.cloud);
        ++summary.attacks_applied;
      } else {
        ++summary.perception_skips;
      }
    }
    if (paired) bundle.clean = std::move(clean);

    for (FrameSink* sink : sinks) sink->consume(bundle);
    ++summary.frames_emitted;
    ++summary.ticks_run;
  }

  for (Role r : kAll) {
    master.notify({ProtocolEvent::Type::shutdown, ticks, r, ticks});
    master.send(r, MessageKind::shutdown, ticks);
  }
  const auto done = master.collect(kAll, ticks, MessageKind::ack);
  for (const auto& [role, msg] : done) {
    summary.role_time_s[to_string(role)] = static_cast<double>(msg.tick_index) * dt;
  }
  for (FrameSink* sink : sinks) sink->finish(summary);
  return summary;
}

}  // namespace advsim
