#include "advsim/comm_attack.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "advsim/errors.hpp"
#include "advsim/random.hpp"

namespace advsim {

namespace {

bool targeted(const std::vector<std::string>& targets, const std::string& id) {
  return std::find(targets.begin(), targets.end(), id) != targets.end();
}

}  // namespace

void PaaParams::validate() const {
  if (offset_m.has_value() == fabricate_at.has_value()) {
    throw ParameterError("paa needs exactly one of offset_m or fabricate_at");
  }
  if (!(plausibility_bound_m >= 0.0)) throw ParameterError("paa plausibility bound must be >= 0");
  if (offset_m && !(norm(*offset_m) > plausibility_bound_m)) {
    throw ParameterError("paa offset norm " + std::to_string(norm(*offset_m)) +
                         " does not exceed plausibility bound " + std::to_string(plausibility_bound_m));
  }
}

std::string ghost_station_id(const std::string& attacker, std::size_t k) {
  return "ghost:" + attacker + ":" + std::to_string(k);
}

bool is_cam_tick(std::size_t tick, double dt_s, const CommSpec& comm) {
  const auto every = static_cast<std::size_t>(std::llround(comm.cam_interval_s / dt_s));
  return every <= 1 || tick % every == 0;
}

std::vector<CamMessage> emit_cams(std::span<const VehicleState> states, double t, const CommSpec& comm) {
  std::vector<CamMessage> out;
  if (!comm.enabled) return out;
  out.reserve(states.size());
  for (const VehicleState& s : states) {
    out.push_back({s.id, t, s.position, s.speed, normalize_angle(s.yaw)});
  }
  return out;
}

RandomBiasAttack::RandomBiasAttack(RbaParams params) : params_(std::move(params)) {
  if (!(params_.delta_m.x >= 0.0 && params_.delta_m.y >= 0.0 && params_.delta_m.z >= 0.0)) {
    throw ParameterError("rba bounds must be >= 0 componentwise");
  }
}

Vec3 RandomBiasAttack::draw(const std::string& station, std::uint64_t salt) const {
  Rng rng(derive_seed(params_.seed, "rba:" + station, salt));
  const Vec3& d = params_.delta_m;
  const double bx = rng.uniform(-d.x, d.x);
  const double by = rng.uniform(-d.y, d.y);
  const double bz = rng.uniform(-d.z, d.z);
  return {bx, by, bz};
}

std::optional<Vec3> RandomBiasAttack::bias_for(const std::string& station) const {
  const auto it = biases_.find(station);
  if (it == biases_.end()) return std::nullopt;
  return it->second;
}

std::vector<CamMessage> RandomBiasAttack::apply(std::vector<CamMessage> cams, double t) {
  if (!params_.window.contains(t)) {
    if (active_) {
      active_ = false;
      biases_.clear();
    }
    return cams;
  }
  if (!active_) {
    active_ = true;
    ++activation_;
  }
  for (CamMessage& cam : cams) {
    if (!targeted(params_.targets, cam.station_id)) continue;
    Vec3 bias;
    if (params_.redraw_per_message) {
      bias = draw(cam.station_id, mix64(activation_) ^ std::bit_cast<std::uint64_t>(cam.generation_time_s));
      biases_[cam.station_id] = bias;
    } else {
      auto it = biases_.find(cam.station_id);
      if (it == biases_.end()) it = biases_.emplace(cam.station_id, draw(cam.station_id, activation_)).first;
      bias = it->second;
    }
    cam.position += bias;
  }
  return cams;
}

std::vector<CamMessage> apply_paa(std::vector<CamMessage> cams, const PaaParams& params, double t) {
  if (!params.window.contains(t)) return cams;
  for (CamMessage& cam : cams) {
    if (!targeted(params.targets, cam.station_id)) continue;
    if (params.offset_m) {
      cam.position += *params.offset_m;
    } else {
      cam.position = *params.fabricate_at;
    }
  }
  return cams;
}

SybilAttack::SybilAttack(SybilParams params) : params_(std::move(params)) {
  if (params_.ghost_count < 1) throw ParameterError("sybil ghost_count must be >= 1");
  if (!(params_.ring_radius_m >= 0.0)) throw ParameterError("sybil ring radius must be >= 0");
}

std::vector<CamMessage> SybilAttack::apply(std::vector<CamMessage> cams, const VehicleState& attacker, double t) {
  if (!params_.window.contains(t)) {
    ghosts_.clear();
    return cams;
  }
  const Vec3 velocity{attacker.speed * std::cos(attacker.yaw), attacker.speed * std::sin(attacker.yaw), 0.0};
  if (ghosts_.empty()) {
    Rng rng(derive_seed(params_.seed, "sybil:" + attacker.id));
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double m = static_cast<double>(params_.ghost_count);
    for (std::size_t k = 0; k < params_.ghost_count; ++k) {
      const double a = phase + 2.0 * std::numbers::pi * static_cast<double>(k) / m;
      ghosts_.push_back(attacker.position +
                        Vec3{params_.ring_radius_m * std::cos(a), params_.ring_radius_m * std::sin(a), 0.0});
    }
  } else if (!params_.stationary) {
    const double elapsed = t - last_t_;
    for (Vec3& g : ghosts_) g += elapsed * velocity;
  }
  last_t_ = t;
  const double speed = params_.stationary ? 0.0 : attacker.speed;
  for (std::size_t k = 0; k < ghosts_.size(); ++k) {
    cams.push_back({ghost_station_id(attacker.id, k), t, ghosts_[k], speed, normalize_angle(attacker.yaw)});
  }
  return cams;
}

Pose apply_gps_spoof(const Pose& true_pose, const GpsSpoofParams& params, double t) {
  if (!params.window.contains(t)) return true_pose;
  return {true_pose.position + params.bias_m, normalize_angle(true_pose.yaw + params.heading_bias_rad)};
}

LocalDynamicMap update_ldm(LocalDynamicMap ldm, std::span<const CamMessage> received,
                           const VehicleState& owner_state, const CommSpec& comm) {
  for (const CamMessage& cam : received) {
    if (cam.station_id == ldm.owner_id) continue;
    if (norm(cam.position - owner_state.position) > comm.reception_radius_m) continue;
    auto [it, fresh] = ldm.entries.try_emplace(cam.station_id, LdmEntry{cam, {}});
    LdmEntry& entry = it->second;
    if (!fresh && cam.generation_time_s >= entry.latest.generation_time_s) entry.latest = cam;
    const auto pos = std::upper_bound(
        entry.history.begin(), entry.history.end(), cam.generation_time_s,
        [](double time, const CamMessage& m) { return time < m.generation_time_s; });
    entry.history.insert(pos, cam);
    while (entry.history.size() > ldm.history_limit) entry.history.pop_front();
  }
  return ldm;
}

}  // namespace advsim
