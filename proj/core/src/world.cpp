#include "advsim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace advsim {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Slab test on one axis. Narrows [t0, t1]; returns false on a miss.
bool slab(double o, double d, double half, double& t0, double& t1) {
  if (d == 0.0) return std::abs(o) <= half;
  double a = (-half - o) / d;
  double b = (half - o) / d;
  if (a > b) std::swap(a, b);
  t0 = std::max(t0, a);
  t1 = std::min(t1, b);
  return t0 <= t1;
}

}  // namespace

Route::Route(std::vector<Vec2> waypoints, bool loop) : waypoints_(std::move(waypoints)), loop_(loop) {
  cumulative_.push_back(0.0);
  const std::size_t n = waypoints_.size();
  const std::size_t segments = n < 2 ? 0 : (loop_ ? n : n - 1);
  for (std::size_t i = 0; i < segments; ++i) {
    const Vec2 a = waypoints_[i];
    const Vec2 b = waypoints_[(i + 1) % n];
    cumulative_.push_back(cumulative_.back() + norm(b - a));
  }
  length_ = cumulative_.back();
}

std::pair<Vec2, double> Route::sample(double s) const {
  if (waypoints_.empty()) return {{}, 0.0};
  const std::size_t n = waypoints_.size();
  if (cumulative_.size() < 2 || length_ <= 0.0) return {waypoints_.front(), 0.0};
  s = std::clamp(s, 0.0, length_);
  // Segment i spans [cumulative_[i], cumulative_[i+1]]; at exactly a vertex
  // the later segment wins except at the very end.
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t seg = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  seg = seg == 0 ? 0 : seg - 1;
  seg = std::min(seg, cumulative_.size() - 2);
  // Skip zero-length segments so the heading is defined.
  while (seg + 1 < cumulative_.size() - 1 && cumulative_[seg + 1] - cumulative_[seg] <= 0.0) ++seg;
  const Vec2 a = waypoints_[seg];
  const Vec2 b = waypoints_[(seg + 1) % n];
  const double len = cumulative_[seg + 1] - cumulative_[seg];
  const double f = len > 0.0 ? (s - cumulative_[seg]) / len : 0.0;
  const Vec2 pos = s >= length_ && !loop_ ? waypoints_.back() : a + f * (b - a);
  return {pos, std::atan2(b.y - a.y, b.x - a.x)};
}

VehicleState spawn_vehicle(std::string id, const Route& route, double speed, Dims dims) {
  const auto [pos, heading] = route.sample(0.0);
  VehicleState v;
  v.id = std::move(id);
  v.position = {pos.x, pos.y, 0.5 * dims.height};
  v.yaw = normalize_angle(heading);
  v.speed = route.length() > 0.0 ? speed : 0.0;
  v.dims = dims;
  return v;
}

std::vector<VehicleState> step_traffic(std::span<const VehicleState> states,
                                       const std::map<std::string, Route>& routes, double dt) {
  std::vector<VehicleState> out(states.begin(), states.end());
  for (VehicleState& v : out) {
    const auto it = routes.find(v.id);
    if (it == routes.end() || it->second.length() <= 0.0) {
      v.speed = 0.0;
      continue;
    }
    if (v.speed == 0.0) continue;
    const Route& route = it->second;
    double s = v.route_progress_m + v.speed * dt;
    if (route.loop()) {
      s = std::fmod(s, route.length());
    } else if (s >= route.length()) {
      s = route.length();
      v.speed = 0.0;
    }
    const auto [pos, heading] = route.sample(s);
    v.route_progress_m = s;
    v.position.x = pos.x;
    v.position.y = pos.y;
    v.yaw = normalize_angle(heading);
  }
  return out;
}

Pose sensor_pose(const VehicleState& ego, const SensorSpec& sensor) {
  return {ego.position + rotate_z(sensor.mount_offset, ego.yaw), ego.yaw};
}

double channel_elevation(const SensorSpec& sensor, std::size_t channel) {
  if (sensor.channels <= 1) return 0.5 * (sensor.fov_min_deg + sensor.fov_max_deg) * kDegToRad;
  const double f = static_cast<double>(channel) / static_cast<double>(sensor.channels - 1);
  return (sensor.fov_min_deg + f * (sensor.fov_max_deg - sensor.fov_min_deg)) * kDegToRad;
}

double intersect_vehicle(const VehicleState& v, const Vec3& origin, const Vec3& dir) {
  const Vec3 o = rotate_z(origin - v.position, -v.yaw);
  const Vec3 d = rotate_z(dir, -v.yaw);
  double t0 = -kInf;
  double t1 = kInf;
  if (!slab(o.x, d.x, 0.5 * v.dims.length, t0, t1)) return -1.0;
  if (!slab(o.y, d.y, 0.5 * v.dims.width, t0, t1)) return -1.0;
  if (!slab(o.z, d.z, 0.5 * v.dims.height, t0, t1)) return -1.0;
  // Rays starting inside a box are ignored.
  return t0 > 0.0 ? t0 : -1.0;
}

PointCloud raycast_lidar(const VehicleState& ego, std::span<const VehicleState> others, const SensorSpec& sensor,
                         Rng& rng) {
  const Pose pose = sensor_pose(ego, sensor);
  const Vec3 origin = pose.position;
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);

  std::vector<const VehicleState*> targets;
  for (const VehicleState& v : others) {
    if (v.id != ego.id) targets.push_back(&v);
  }

  PointCloud cloud;
  const double dazi = 2.0 * std::numbers::pi / static_cast<double>(std::max<std::size_t>(sensor.points_per_channel, 1));
  for (std::size_t ch = 0; ch < sensor.channels; ++ch) {
    const double el = channel_elevation(sensor, ch);
    const double ce = std::cos(el);
    const double se = std::sin(el);
    for (std::size_t j = 0; j < sensor.points_per_channel; ++j) {
      const double az = dazi * static_cast<double>(j);
      const Vec3 local{ce * std::cos(az), ce * std::sin(az), se};
      const Vec3 dir{c * local.x - s * local.y, s * local.x + c * local.y, local.z};

      double best = kInf;
      if (dir.z < 0.0 && origin.z > 0.0) best = -origin.z / dir.z;
      for (const VehicleState* v : targets) {
        const double t = intersect_vehicle(*v, origin, dir);
        if (t > 0.0 && t < best) best = t;
      }
      if (!(best <= sensor.range_m)) continue;
      double range = best;
      if (sensor.noise_sigma_m > 0.0) range += rng.normal(0.0, sensor.noise_sigma_m);
      cloud.points.push_back(range * local);
    }
  }
  return cloud;
}

std::vector<BBox3D> ground_truth_boxes(const VehicleState& ego, std::span<const VehicleState> others,
                                       const SensorSpec& sensor) {
  const Pose pose = sensor_pose(ego, sensor);
  std::vector<BBox3D> boxes;
  for (const VehicleState& v : others) {
    if (v.id == ego.id) continue;
    const Vec3 center = rotate_z(v.position - pose.position, -pose.yaw);
    if (norm(center) > sensor.range_m) continue;
    boxes.push_back({center, v.dims, normalize_angle(v.yaw - pose.yaw), ObjectClass::car});
  }
  return boxes;
}

}  // namespace advsim
