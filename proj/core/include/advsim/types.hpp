#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "advsim/geometry.hpp"

namespace advsim {

struct Dims {
  double length = 4.5;
  double width = 1.8;
  double height = 1.6;

  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Kinematic actor state exchanged between the traffic and world roles.
struct VehicleState {
  std::string id;
  Vec3 position;  // map frame; z is half the height above ground
  double yaw = 0.0;
  double speed = 0.0;
  Dims dims;
  double route_progress_m = 0.0;  // arc length travelled along the route

  Pose pose() const { return {position, yaw}; }

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

enum class ObjectClass { car };

const char* to_string(ObjectClass c);
ObjectClass object_class_from_string(const std::string& s);

struct BBox3D {
  Vec3 center;
  Dims dims;
  double yaw = 0.0;  // (-pi, pi]
  ObjectClass cls = ObjectClass::car;

  friend bool operator==(const BBox3D&, const BBox3D&) = default;
};

/// Ordered LiDAR returns in the sensor frame.
struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  const Vec3& operator[](std::size_t i) const { return points[i]; }
  Vec3& operator[](std::size_t i) { return points[i]; }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// Subset of a Cooperative Awareness Message. Positions are map-frame meters.
struct CamMessage {
  std::string station_id;
  double generation_time_s = 0.0;
  Vec3 position;
  double speed = 0.0;
  double heading = 0.0;

  friend bool operator==(const CamMessage&, const CamMessage&) = default;
};

struct LdmEntry {
  CamMessage latest;
  std::deque<CamMessage> history;  // oldest first

  friend bool operator==(const LdmEntry&, const LdmEntry&) = default;
};

/// Per-vehicle store of the freshest known state of every heard station.
struct LocalDynamicMap {
  std::string owner_id;
  std::size_t history_limit = 5;
  std::map<std::string, LdmEntry> entries;

  friend bool operator==(const LocalDynamicMap&, const LocalDynamicMap&) = default;
};

/// Everything one tick produced, after any active attacks.
struct FrameRecord {
  std::size_t tick_index = 0;
  double sim_time_s = 0.0;
  PointCloud point_cloud;
  std::vector<BBox3D> gt_boxes;
  std::vector<VehicleState> vehicle_states;
  std::vector<CamMessage> cams_emitted;
  std::vector<LocalDynamicMap> ldms;
  Transform4 ego_to_world{};

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

}  // namespace advsim
