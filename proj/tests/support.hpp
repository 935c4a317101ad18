#pragma once

// Shared scene builders and helpers for the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advsim/detector.hpp"
#include "advsim/random.hpp"
#include "advsim/types.hpp"

namespace advsim::test {

inline PointCloud cloud_of(std::vector<Vec3> pts) { return PointCloud{std::move(pts)}; }

struct DeskScene {
  PointCloud cloud;
  std::vector<BBox3D> gt;
};

// Point-in-oriented-box check written independently of the library.
inline bool inside_box(const BBox3D& b, const Vec3& p, double inflate = 0.0) {
  const double dx = p.x - b.center.x;
  const double dy = p.y - b.center.y;
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const double lx = c * dx + s * dy;
  const double ly = -s * dx + c * dy;
  const double lz = p.z - b.center.z;
  return std::abs(lx) <= 0.5 * b.dims.length + inflate && std::abs(ly) <= 0.5 * b.dims.width + inflate &&
         std::abs(lz) <= 0.5 * b.dims.height + inflate;
}

// One car somewhere in front of the sensor, with points on its surface,
// plus scattered clutter. At most `n` points in total.
inline DeskScene desk_scene(std::uint64_t seed, std::size_t n = 400, double clutter = 0.3) {
  Rng rng(seed);
  DeskScene s;
  BBox3D car;
  car.center = {rng.uniform(8.0, 30.0), rng.uniform(-8.0, 8.0), 0.8};
  car.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
  s.gt.push_back(car);
  const auto on_car = static_cast<std::size_t>(static_cast<double>(n) * (1.0 - clutter));
  for (std::size_t i = 0; i < n; ++i) {
    if (i < on_car) {
      const Vec3 local{rng.uniform(-2.25, 2.25), rng.uniform(-0.9, 0.9), rng.uniform(-0.8, 0.8)};
      const double c = std::cos(car.yaw), sn = std::sin(car.yaw);
      s.cloud.points.push_back(
          {car.center.x + c * local.x - sn * local.y, car.center.y + sn * local.x + c * local.y, car.center.z + local.z});
    } else {
      s.cloud.points.push_back({rng.uniform(1.0, 60.0), rng.uniform(-30.0, 30.0), rng.uniform(-1.0, 1.0)});
    }
  }
  return s;
}

// Smallest scenario document the parser accepts, plus a few overrides.
inline nlohmann::json minimal_config(double duration = 1.0, double dt = 0.1) {
  nlohmann::json c;
  c["duration_s"] = duration;
  c["dt_s"] = dt;
  c["seed"] = 7;
  c["vehicles"] = nlohmann::json::array();
  c["vehicles"].push_back({{"id", "ego"}, {"route", {{0, 0}, {500, 0}}}, {"speed_mps", 10}, {"is_ego", true}});
  return c;
}

// Small but non-trivial traffic: a couple of cars ahead of the ego and a
// cheap sensor so whole sessions stay fast.
inline nlohmann::json small_scene(double duration = 1.0, double dt = 0.1, std::uint64_t seed = 11) {
  nlohmann::json c = minimal_config(duration, dt);
  c["seed"] = seed;
  c["vehicles"].push_back({{"id", "car1"}, {"route", {{12, 0}, {600, 0}}}, {"speed_mps", 9}});
  c["vehicles"].push_back({{"id", "car2"}, {"route", {{20, 3.5}, {600, 3.5}}}, {"speed_mps", 11}, {"is_attacker", true}});
  c["vehicles"].push_back({{"id", "car3"}, {"route", {{30, -3.5}, {600, -3.5}}}, {"speed_mps", 8}});
  c["sensors"] = {{{"kind", "lidar"},
                   {"channels", 16},
                   {"points_per_channel", 180},
                   {"range_m", 60},
                   {"vertical_fov", {-10.0, 4.0}},
                   {"mount_offset", {0, 0, 1.0}},
                   {"noise_sigma_m", 0.01}}};
  c["execution"] = "sequential";
  return c;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Relative path -> content for every regular file under `dir`.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).generic_string()] = read_bytes(e.path());
  }
  return out;
}

// FNV-1a over sorted (path, bytes) pairs.
inline std::uint64_t hash_directory(const std::filesystem::path& dir) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto& [name, bytes] : snapshot(dir)) {
    feed(name);
    feed(bytes);
  }
  return h;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("advsim_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Central differences of a scalar loss w.r.t. every x/y/z coordinate.
template <class Loss>
std::vector<Vec3> finite_difference(const PointCloud& cloud, Loss&& loss, double h = 1e-4) {
  std::vector<Vec3> g(cloud.size());
  PointCloud work = cloud;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double x0 = work[i][a];
      work[i][a] = x0 + h;
      const double up = loss(work);
      work[i][a] = x0 - h;
      const double down = loss(work);
      work[i][a] = x0;
      g[i][a] = (up - down) / (2.0 * h);
    }
  }
  return g;
}

// max_i,a |a - b| / max_i,a |b|, i.e. relative error in max norm.
inline double max_norm_relative_error(const std::vector<Vec3>& analytic, const std::vector<Vec3>& reference) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      num = std::max(num, std::abs(analytic[i][a] - reference[i][a]));
      den = std::max(den, std::abs(reference[i][a]));
    }
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace advsim::test
