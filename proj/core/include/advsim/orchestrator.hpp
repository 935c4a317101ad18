#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "advsim/detector.hpp"
#include "advsim/scenario.hpp"
#include "advsim/types.hpp"

namespace advsim {

enum class Role { traffic, world, v2x };
enum class MessageKind { step, state_sync, cam_batch, ack, shutdown };

const char* to_string(Role r);
const char* to_string(MessageKind k);

/// What the V2X role hands back after a state sync.
struct CamBatch {
  std::vector<CamMessage> cams;  // after communication attacks
  std::vector<CamMessage> clean_cams;
  std::vector<LocalDynamicMap> ldms;
  std::vector<LocalDynamicMap> clean_ldms;
  Pose reported_sensor_pose;  // GPS-spoofed when active
  Pose true_sensor_pose;
  std::size_t attacks_active = 0;

  friend bool operator==(const CamBatch&, const CamBatch&) = default;
};

using TickPayload = std::variant<std::monostate, std::vector<VehicleState>, CamBatch>;

/// Wire layout if ever serialized: kind, tick_index, payload, each
/// length-prefixed in that order.
struct TickMessage {
  MessageKind kind = MessageKind::step;
  std::size_t tick_index = 0;
  TickPayload payload;
};

/// Follower states with position, yaw, speed and route progress taken from
/// the leader by id. Throws IdMismatchError when the id sets differ.
std::vector<VehicleState> sync_states(std::span<const VehicleState> leader, std::span<const VehicleState> follower);

/// Coordinator-side view of the protocol, reported in order.
struct ProtocolEvent {
  enum class Type { step_sent, ack, synced, shutdown };
  Type type = Type::step_sent;
  std::size_t master_tick = 0;
  Role role = Role::v2x;
  std::size_t role_tick = 0;  // tick index echoed by the role
  const std::vector<VehicleState>* leader = nullptr;    // set on `synced`
  const std::vector<VehicleState>* follower = nullptr;  // set on `synced`
};

struct SessionOptions {
  std::function<void(const ProtocolEvent&)> observer;
  /// Called inside a role before it handles a message; may throw or stall.
  std::function<void(Role, const TickMessage&)> fault_hook;
  std::optional<ExecutionMode> execution;
  std::optional<double> barrier_timeout_s;
};

struct SessionSummary {
  std::size_t ticks_run = 0;
  std::size_t frames_emitted = 0;
  std::size_t attacks_applied = 0;
  std::size_t perception_skips = 0;
  std::map<std::string, double> role_time_s;
};

struct FrameBundle {
  FrameRecord frame;                 // post-attack
  std::optional<FrameRecord> clean;  // paired clean frame, when requested
};

class FrameSink {
 public:
  virtual ~FrameSink() = default;
  virtual void consume(const FrameBundle& bundle) = 0;
  virtual void finish(const SessionSummary&) {}
};

/// Writes frames to `dir` and paired clean frames to `dir/clean`, plus a
/// metadata.json in each on finish.
class DirectorySink final : public FrameSink {
 public:
  DirectorySink(std::filesystem::path dir, const ScenarioConfig& config);

  void consume(const FrameBundle& bundle) override;
  void finish(const SessionSummary& summary) override;

 private:
  std::filesystem::path dir_;
  nlohmann::ordered_json config_;
  nlohmann::ordered_json detector_;
  double iou_threshold_;
  bool paired_ = false;
  std::size_t frames_ = 0;
};

/// Local stream: hands every bundle to a callback.
class CallbackSink final : public FrameSink {
 public:
  explicit CallbackSink(std::function<void(const FrameBundle&)> fn) : fn_(std::move(fn)) {}
  void consume(const FrameBundle& bundle) override { fn_(bundle); }

 private:
  std::function<void(const FrameBundle&)> fn_;
};

/// Metadata block every dataset directory carries.
nlohmann::ordered_json dataset_metadata(const nlohmann::ordered_json& detector, double iou_threshold,
                                        std::size_t frames);

struct PerceptionOutcome {
  std::optional<PointCloud> cloud;  // empty when the attack is degenerate here
  std::string skip_reason;
  std::vector<Vec3> injected_from;  // attach: start of each injected point
};

/// Runs one perception attack on one frame. The attack seed is re-derived
/// per tick. Degenerate inputs (empty cloud, zero detach budget, K > N) are
/// reported instead of thrown.
PerceptionOutcome run_perception_attack(const Detector& detector, const AttackSpec& attack, const PointCloud& cloud,
                                        std::span<const BBox3D> gt, std::size_t tick);

/// Lockstep co-simulation of the traffic, world and V2X roles.
SessionSummary run_session(const ScenarioConfig& config, std::span<FrameSink* const> sinks,
                           const SessionOptions& options = {});

}  // namespace advsim
