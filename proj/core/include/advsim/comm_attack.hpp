#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advsim/types.hpp"

namespace advsim {

struct CommSpec {
  double cam_interval_s = 0.1;
  double reception_radius_m = 300.0;  // stands in for transmission power
  bool enabled = true;
  std::size_t ldm_history = 5;

  friend bool operator==(const CommSpec&, const CommSpec&) = default;
};

/// Closed time interval during which an attack is active.
struct ActivationWindow {
  double start_s = 0.0;
  double end_s = std::numeric_limits<double>::infinity();

  bool contains(double t) const { return t >= start_s && t <= end_s; }
  friend bool operator==(const ActivationWindow&, const ActivationWindow&) = default;
};

struct SybilParams {
  std::size_t ghost_count = 3;
  double ring_radius_m = 5.0;
  std::string attacker;     // empty: the vehicle flagged as attacker
  bool stationary = false;  // ghosts stay where spawned
  ActivationWindow window;
  std::uint64_t seed = 0;

  friend bool operator==(const SybilParams&, const SybilParams&) = default;
};

struct RbaParams {
  Vec3 delta_m;                      // per-dimension bound
  std::vector<std::string> targets;  // empty: vehicles flagged as attackers
  bool redraw_per_message = false;
  ActivationWindow window;
  std::uint64_t seed = 0;

  friend bool operator==(const RbaParams&, const RbaParams&) = default;
};

struct PaaParams {
  std::optional<Vec3> offset_m;
  std::optional<Vec3> fabricate_at;
  std::vector<std::string> targets;
  double plausibility_bound_m = 10.0;
  ActivationWindow window;

  /// Exactly one of offset/fabricate_at must be set, and an offset must be
  /// longer than the plausibility bound. Throws ParameterError otherwise.
  void validate() const;
  friend bool operator==(const PaaParams&, const PaaParams&) = default;
};

struct GpsSpoofParams {
  Vec3 bias_m;
  double heading_bias_rad = 0.0;
  ActivationWindow window;

  friend bool operator==(const GpsSpoofParams&, const GpsSpoofParams&) = default;
};

/// Ghost station id for the k-th ghost of an attacker.
std::string ghost_station_id(const std::string& attacker, std::size_t k);

/// True when tick `tick` emits CAMs (every cam_interval / dt ticks).
bool is_cam_tick(std::size_t tick, double dt_s, const CommSpec& comm);

/// One CAM per vehicle with its true pose, speed and heading.
std::vector<CamMessage> emit_cams(std::span<const VehicleState> states, double t, const CommSpec& comm);

/// Random Bias Attack: x_adv = x + delta with delta_i ~ U[-Delta_i, Delta_i].
/// The bias is drawn once per station and activation and then held.
class RandomBiasAttack {
 public:
  explicit RandomBiasAttack(RbaParams params);

  std::vector<CamMessage> apply(std::vector<CamMessage> cams, double t);

  /// Bias currently held for a station, if any.
  std::optional<Vec3> bias_for(const std::string& station) const;
  const RbaParams& params() const { return params_; }

 private:
  Vec3 draw(const std::string& station, std::uint64_t salt) const;

  RbaParams params_;
  std::uint64_t activation_ = 0;
  bool active_ = false;
  std::map<std::string, Vec3> biases_;
};

/// Position Altering Attack on the targeted stations; pure.
std::vector<CamMessage> apply_paa(std::vector<CamMessage> cams, const PaaParams& params, double t);

/// Sybil attack: the attacker additionally broadcasts M ghost identities
/// spawned on a ring around it. Ghost positions persist across ticks.
class SybilAttack {
 public:
  explicit SybilAttack(SybilParams params);

  std::vector<CamMessage> apply(std::vector<CamMessage> cams, const VehicleState& attacker, double t);

  const SybilParams& params() const { return params_; }

 private:
  SybilParams params_;
  std::vector<Vec3> ghosts_;
  double last_t_ = 0.0;
};

/// Reported ego pose under GPS spoofing; identity outside the window.
Pose apply_gps_spoof(const Pose& true_pose, const GpsSpoofParams& params, double t);

/// Merges CAMs heard within the reception radius of the owner (judged by
/// the sender's reported position) into the owner's LDM.
LocalDynamicMap update_ldm(LocalDynamicMap ldm, std::span<const CamMessage> received,
                           const VehicleState& owner_state, const CommSpec& comm);

}  // namespace advsim
