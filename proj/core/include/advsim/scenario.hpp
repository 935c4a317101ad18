#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "advsim/comm_attack.hpp"
#include "advsim/detector.hpp"
#include "advsim/perception_attack.hpp"
#include "advsim/world.hpp"

namespace advsim {

enum class SyncMode { traffic_driven, world_driven };
enum class ExecutionMode { threaded, sequential };

enum class AttackType { perturb, detach, attach, sybil, rba, paa, gps_spoof };

const char* to_string(AttackType t);
/// Throws ParameterError on an unknown name.
AttackType attack_type_from_string(std::string_view name);
bool is_perception_attack(AttackType t);

using AttackParams =
    std::variant<PerturbParams, DetachParams, AttachParams, SybilParams, RbaParams, PaaParams, GpsSpoofParams>;

struct AttackSpec {
  AttackType type = AttackType::perturb;
  AttackParams params;
};

struct MapSpec {
  std::string name = "desk";
  // Accepted for compatibility with world-simulator configs; not simulated.
  nlohmann::ordered_json weather = nlohmann::ordered_json::object();
};

struct VehicleSpec {
  std::string id;
  std::vector<Vec2> route;
  bool loop = false;
  double speed_mps = 0.0;
  Dims dims;
  bool is_ego = false;
  bool is_attacker = false;
};

struct ScenarioConfig {
  double duration_s = 0.0;
  double dt_s = 0.1;
  SyncMode mode = SyncMode::traffic_driven;
  std::uint64_t seed = 0;
  MapSpec map;
  std::vector<VehicleSpec> vehicles;
  std::vector<SensorSpec> sensors;
  CommSpec comm;
  std::vector<AttackSpec> attacks;
  DetectorModel detector;
  double iou_threshold = 0.5;
  std::string output_dir;
  bool paired_output = true;
  double barrier_timeout_s = 10.0;
  ExecutionMode execution = ExecutionMode::threaded;

  /// round(duration / dt).
  std::size_t tick_count() const;
  const VehicleSpec& ego() const;
  /// The LiDAR mounted on the ego (the first sensor).
  const SensorSpec& lidar() const;
  bool has_perception_attacks() const;
  bool has_attacks() const { return !attacks.empty(); }
};

/// Parses and validates a scenario document. Throws ConfigError with the
/// offending field path.
ScenarioConfig parse_config(std::string_view text);

/// Validates one attack's params object. `config` supplies vehicle ids and
/// seed defaults when the attack is part of a scenario; `path` prefixes
/// error locations.
AttackSpec parse_attack(std::string_view type, const nlohmann::json& params, const ScenarioConfig* config,
                        std::uint64_t default_seed, const std::string& path = "/params");

DetectorModel parse_detector(const nlohmann::json& j, const std::string& path = "/detector");

/// Canonical, fully-defaulted form of a config (what parse_config accepted).
nlohmann::ordered_json to_json(const ScenarioConfig& config);
nlohmann::ordered_json to_json(const AttackSpec& attack);
nlohmann::ordered_json to_json(const DetectorModel& model);
nlohmann::ordered_json to_json(const SensorSpec& sensor);

}  // namespace advsim
