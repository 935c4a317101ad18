#include <doctest.h>

#include <cmath>
#include <map>

#include "advsim/world.hpp"
#include "support.hpp"

using namespace advsim;

namespace {

VehicleState vehicle(const std::string& id, Vec3 pos, double yaw = 0.0, Dims dims = {}) {
  VehicleState v;
  v.id = id;
  v.position = pos;
  v.yaw = yaw;
  v.dims = dims;
  return v;
}

}  // namespace

TEST_CASE("route sampling") {
  const Route r({{0, 0}, {10, 0}, {10, 10}}, false);
  CHECK(r.length() == 20.0);
  CHECK(r.sample(5).first == Vec2{5, 0});
  CHECK(r.sample(15).first == Vec2{10, 5});
  CHECK(r.sample(15).second == doctest::Approx(std::numbers::pi / 2));
  CHECK(r.sample(99).first == Vec2{10, 10});

  const Route loop({{0, 0}, {10, 0}, {10, 10}, {0, 10}}, true);
  CHECK(loop.length() == 40.0);
  CHECK(loop.sample(35).first == Vec2{0, 5});
}

TEST_CASE("traffic step") {
  std::map<std::string, Route> routes{{"a", Route({{0, 0}, {100, 0}}, false)}};
  VehicleState a = spawn_vehicle("a", routes.at("a"), 10.0, {});

  SUBCASE("moves speed times dt") {
    const auto next = step_traffic(std::vector<VehicleState>{a}, routes, 0.1);
    CHECK(next[0].position.x == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(next[0].position.y == 0.0);
    CHECK(next[0].route_progress_m == doctest::Approx(1.0));
  }
  SUBCASE("zero speed is the identity") {
    a.speed = 0.0;
    const std::vector<VehicleState> in{a};
    CHECK(step_traffic(in, routes, 0.1) == in);
  }
  SUBCASE("clamps at the end and stops") {
    a.route_progress_m = 99.5;
    a.position.x = 99.5;
    const auto next = step_traffic(std::vector<VehicleState>{a}, routes, 0.1);
    CHECK(next[0].position.x == 100.0);
    CHECK(next[0].speed == 0.0);
  }
  SUBCASE("looping routes wrap") {
    std::map<std::string, Route> lr{{"a", Route({{0, 0}, {10, 0}, {10, 10}, {0, 10}}, true)}};
    VehicleState v = spawn_vehicle("a", lr.at("a"), 10.0, {});
    v.route_progress_m = 39.5;
    const auto next = step_traffic(std::vector<VehicleState>{v}, lr, 0.1);
    CHECK(next[0].route_progress_m == doctest::Approx(0.5));
    CHECK(next[0].speed == 10.0);
  }
}

TEST_CASE("single ray hits the near face") {
  SensorSpec s;
  s.channels = 1;
  s.points_per_channel = 1;
  s.fov_min_deg = s.fov_max_deg = 0.0;
  s.mount_offset = {0, 0, 1};
  s.noise_sigma_m = 0.0;
  const VehicleState ego = vehicle("ego", {0, 0, 0});
  const std::vector<VehicleState> others{vehicle("t", {10, 0, 1}, 0.0, {4, 2, 2})};
  Rng rng(1);
  const PointCloud c = raycast_lidar(ego, others, s, rng);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == Vec3{8, 0, 0});
}

TEST_CASE("upward rays with nothing around return nothing") {
  SensorSpec s;
  s.channels = 4;
  s.points_per_channel = 90;
  s.fov_min_deg = 0.0;
  s.fov_max_deg = 10.0;
  const VehicleState ego = vehicle("ego", {0, 0, 0.8});
  Rng rng(2);
  CHECK(raycast_lidar(ego, std::vector<VehicleState>{ego}, s, rng).empty());
}

TEST_CASE("returns lie on the vehicle or on the ground") {
  SensorSpec s;  // 64 channels, -24.8 .. 2 degrees
  s.points_per_channel = 512;
  s.noise_sigma_m = 0.02;
  const VehicleState ego = vehicle("ego", {0, 0, 0.8});
  const VehicleState car = vehicle("car", {10, 0, 0.8}, 0.3);
  const std::vector<VehicleState> all{ego, car};
  Rng rng(3);
  const PointCloud c = raycast_lidar(ego, all, s, rng);
  const Pose sp = sensor_pose(ego, s);
  BBox3D box{car.position, car.dims, car.yaw, ObjectClass::car};
  std::size_t on_car = 0;
  for (const Vec3& p : c.points) {
    const Vec3 w = p + sp.position;  // ego yaw is 0
    const bool ground = std::abs(w.z) <= 3.0 * s.noise_sigma_m;
    const bool hit = test::inside_box(box, w, 3.0 * s.noise_sigma_m);
    CHECK((ground || hit));
    on_car += hit && !ground;
    CHECK(norm(p) <= s.range_m + 3.0 * s.noise_sigma_m);
  }
  CHECK(on_car > 100);
}

TEST_CASE("same generator state, same cloud") {
  SensorSpec s;
  s.points_per_channel = 64;
  const VehicleState ego = vehicle("ego", {0, 0, 0.8});
  const std::vector<VehicleState> all{ego, vehicle("car", {12, 2, 0.8})};
  Rng a(9), b(9);
  CHECK(raycast_lidar(ego, all, s, a) == raycast_lidar(ego, all, s, b));
}

TEST_CASE("ground truth boxes") {
  SensorSpec s;
  s.mount_offset = {0, 0, 1.0};
  const VehicleState ego = vehicle("ego", {0, 0, 0.8});  // sensor 1.8 m above ground

  SUBCASE("vehicle ahead in the sensor frame") {
    const std::vector<VehicleState> all{ego, vehicle("car", {10, 0, 0.8})};
    const auto boxes = ground_truth_boxes(ego, all, s);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].center.x == 10.0);
    CHECK(boxes[0].center.y == 0.0);
    CHECK(boxes[0].center.z == doctest::Approx(0.8 - 1.8));
    CHECK(boxes[0].yaw == 0.0);
  }
  SUBCASE("rotated ego") {
    VehicleState e = ego;
    e.yaw = std::numbers::pi / 2;
    const std::vector<VehicleState> all{e, vehicle("car", {0, 10, 0.8}, std::numbers::pi / 2)};
    const auto boxes = ground_truth_boxes(e, all, s);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].center.x == doctest::Approx(10.0));
    CHECK(std::abs(boxes[0].center.y) < 1e-12);
    CHECK(std::abs(boxes[0].yaw) < 1e-12);
  }
  SUBCASE("nobody else") { CHECK(ground_truth_boxes(ego, std::vector<VehicleState>{ego}, s).empty()); }
  SUBCASE("beyond range") {
    const std::vector<VehicleState> all{ego, vehicle("far", {101, 0, 1.8})};
    CHECK(ground_truth_boxes(ego, all, s).empty());
  }
}
