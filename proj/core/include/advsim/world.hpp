#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "advsim/geometry.hpp"
#include "advsim/random.hpp"
#include "advsim/types.hpp"

namespace advsim {

/// Polyline route in the map frame. A looping route closes back onto its
/// first waypoint; otherwise vehicles stop at the last one.
class Route {
 public:
  Route() = default;
  Route(std::vector<Vec2> waypoints, bool loop);

  double length() const noexcept { return length_; }
  bool loop() const noexcept { return loop_; }
  const std::vector<Vec2>& waypoints() const noexcept { return waypoints_; }

  /// Position and segment heading at arc length s, clamped to [0, length].
  std::pair<Vec2, double> sample(double s) const;

 private:
  std::vector<Vec2> waypoints_;
  std::vector<double> cumulative_;  // arc length at each vertex of the path
  bool loop_ = false;
  double length_ = 0.0;
};

struct SensorSpec {
  std::size_t channels = 64;
  double rotation_hz = 10.0;
  double range_m = 100.0;
  std::size_t points_per_channel = 1024;
  double fov_min_deg = -24.8;
  double fov_max_deg = 2.0;
  Vec3 mount_offset{0.0, 0.0, 1.0};
  double noise_sigma_m = 0.01;

  friend bool operator==(const SensorSpec&, const SensorSpec&) = default;
};

/// Vehicle at the start of its route.
VehicleState spawn_vehicle(std::string id, const Route& route, double speed, Dims dims);

/// Advances every vehicle speed * dt along its route. Vehicles without a
/// route, or with a degenerate one, hold in place with speed 0.
std::vector<VehicleState> step_traffic(std::span<const VehicleState> states,
                                       const std::map<std::string, Route>& routes, double dt);

/// Sensor pose in the map frame: ego pose composed with the mount offset.
Pose sensor_pose(const VehicleState& ego, const SensorSpec& sensor);

/// Elevation (radians) of channel c.
double channel_elevation(const SensorSpec& sensor, std::size_t channel);

/// Ray parameter of the first entry into a vehicle's oriented box, or a
/// negative value on a miss. `origin`/`dir` are in the map frame.
double intersect_vehicle(const VehicleState& v, const Vec3& origin, const Vec3& dir);

/// Synthetic spinning LiDAR. Output is channel-major, azimuth-minor, in the
/// sensor frame; rays that hit nothing within range emit nothing. `rng` is
/// only consumed for range noise.
PointCloud raycast_lidar(const VehicleState& ego, std::span<const VehicleState> others, const SensorSpec& sensor,
                         Rng& rng);

/// One box per non-ego vehicle whose center is within range of the sensor,
/// in the sensor frame.
std::vector<BBox3D> ground_truth_boxes(const VehicleState& ego, std::span<const VehicleState> others,
                                       const SensorSpec& sensor);

}  // namespace advsim
