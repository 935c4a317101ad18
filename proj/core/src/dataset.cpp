#include "advsim/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "advsim/errors.hpp"

namespace advsim {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json vec_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

ordered_json cam_json(const CamMessage& c) {
  return {{"station_id", c.station_id},
          {"generation_time_s", c.generation_time_s},
          {"position", vec_json(c.position)},
          {"speed", c.speed},
          {"heading", c.heading}};
}

CamMessage cam_from(const json& j) {
  return {j.at("station_id").get<std::string>(), j.at("generation_time_s").get<double>(), vec_from(j.at("position")),
          j.at("speed").get<double>(), j.at("heading").get<double>()};
}

}  // namespace

std::string tick_stem(std::size_t tick) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", tick);
  return buf;
}

std::vector<unsigned char> encode_cloud(const PointCloud& cloud) {
  std::vector<unsigned char> out;
  out.reserve(cloud.size() * 16);
  auto put = [&](float f) {
    const auto u = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>(u >> (8 * b)));
  };
  for (const Vec3& p : cloud.points) {
    put(static_cast<float>(p.x));
    put(static_cast<float>(p.y));
    put(static_cast<float>(p.z));
    put(0.0F);
  }
  return out;
}

PointCloud decode_cloud(const std::vector<unsigned char>& bytes, const fs::path& source) {
  if (bytes.size() % 16 != 0) {
    throw FormatError(source, "malformed cloud file (" + std::to_string(bytes.size()) +
                                  " bytes is not a multiple of 16)");
  }
  auto get = [&](std::size_t at) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(bytes[at + b]) << (8 * b);
    return static_cast<double>(std::bit_cast<float>(u));
  };
  PointCloud cloud;
  cloud.points.reserve(bytes.size() / 16);
  for (std::size_t at = 0; at < bytes.size(); at += 16) cloud.points.push_back({get(at), get(at + 4), get(at + 8)});
  return cloud;
}

ordered_json labels_to_json(const FrameRecord& r) {
  ordered_json boxes = ordered_json::array();
  for (const BBox3D& b : r.gt_boxes) {
    boxes.push_back({b.center.x, b.center.y, b.center.z, b.dims.length, b.dims.width, b.dims.height, b.yaw,
                     to_string(b.cls)});
  }
  ordered_json states = ordered_json::array();
  for (const VehicleState& v : r.vehicle_states) {
    states.push_back({{"id", v.id},
                      {"position", vec_json(v.position)},
                      {"yaw", v.yaw},
                      {"speed", v.speed},
                      {"dims", {v.dims.length, v.dims.width, v.dims.height}},
                      {"route_progress_m", v.route_progress_m}});
  }
  ordered_json cams = ordered_json::array();
  for (const CamMessage& c : r.cams_emitted) cams.push_back(cam_json(c));
  ordered_json ldms = ordered_json::array();
  for (const LocalDynamicMap& l : r.ldms) {
    ordered_json entries = ordered_json::array();
    for (const auto& [id, e] : l.entries) {
      ordered_json history = ordered_json::array();
      for (const CamMessage& c : e.history) history.push_back(cam_json(c));
      entries.push_back({{"station_id", id}, {"latest", cam_json(e.latest)}, {"history", history}});
    }
    ldms.push_back({{"owner_id", l.owner_id}, {"history_limit", l.history_limit}, {"entries", entries}});
  }
  return {{"tick_index", r.tick_index},
          {"sim_time_s", r.sim_time_s},
          {"gt_boxes", boxes},
          {"vehicle_states", states},
          {"cams_emitted", cams},
          {"ldms", ldms},
          {"ego_to_world", r.ego_to_world}};
}

FrameRecord labels_from_json(const json& j) {
  FrameRecord r;
  r.tick_index = j.at("tick_index").get<std::size_t>();
  r.sim_time_s = j.at("sim_time_s").get<double>();
  for (const json& b : j.at("gt_boxes")) {
    r.gt_boxes.push_back({{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>()},
                          {b.at(3).get<double>(), b.at(4).get<double>(), b.at(5).get<double>()},
                          b.at(6).get<double>(),
                          object_class_from_string(b.at(7).get<std::string>())});
  }
  for (const json& v : j.at("vehicle_states")) {
    VehicleState s;
    s.id = v.at("id").get<std::string>();
    s.position = vec_from(v.at("position"));
    s.yaw = v.at("yaw").get<double>();
    s.speed = v.at("speed").get<double>();
    const json& d = v.at("dims");
    s.dims = {d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>()};
    s.route_progress_m = v.value("route_progress_m", 0.0);
    r.vehicle_states.push_back(std::move(s));
  }
  for (const json& c : j.at("cams_emitted")) r.cams_emitted.push_back(cam_from(c));
  if (j.contains("ldms")) {
    for (const json& l : j.at("ldms")) {
      LocalDynamicMap ldm;
      ldm.owner_id = l.at("owner_id").get<std::string>();
      ldm.history_limit = l.at("history_limit").get<std::size_t>();
      for (const json& e : l.at("entries")) {
        LdmEntry entry{cam_from(e.at("latest")), {}};
        for (const json& c : e.at("history")) entry.history.push_back(cam_from(c));
        ldm.entries.emplace(e.at("station_id").get<std::string>(), std::move(entry));
      }
      r.ldms.push_back(std::move(ldm));
    }
  }
  const json& t = j.at("ego_to_world");
  if (!t.is_array() || t.size() != 16) throw ParameterError("ego_to_world must hold 16 numbers");
  for (std::size_t i = 0; i < 16; ++i) r.ego_to_world[i] = t[i].get<double>();
  return r;
}

void write_file(const fs::path& file, const std::string& bytes) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(file, "cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError(file, "write failed");
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError(file, "missing or unreadable file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void export_frame(const FrameRecord& record, const fs::path& dir) {
  const std::string stem = tick_stem(record.tick_index);
  const auto cloud = encode_cloud(record.point_cloud);
  write_file(dir / (stem + ".bin"), std::string(cloud.begin(), cloud.end()));
  write_file(dir / (stem + ".json"), labels_to_json(record).dump(1) + "\n");
}

FrameRecord load_frame(const fs::path& dir, std::size_t tick) {
  const std::string stem = tick_stem(tick);
  const fs::path bin = dir / (stem + ".bin");
  const fs::path labels = dir / (stem + ".json");
  const std::string raw = read_file(bin);
  const std::string text = read_file(labels);
  FrameRecord r;
  try {
    r = labels_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw FormatError(labels, std::string("malformed labels file (") + e.what() + ")");
  } catch (const ParameterError& e) {
    throw FormatError(labels, std::string("malformed labels file (") + e.what() + ")");
  }
  r.point_cloud = decode_cloud(std::vector<unsigned char>(raw.begin(), raw.end()), bin);
  return r;
}

std::vector<std::size_t> list_frame_ticks(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError(dir, "not a dataset directory");
  std::vector<std::size_t> ticks;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const fs::path p = entry.path();
    if (!entry.is_regular_file() || p.extension() != ".bin") continue;
    const std::string stem = p.stem().string();
    if (stem.size() < 6 || !std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      continue;
    }
    ticks.push_back(static_cast<std::size_t>(std::stoull(stem)));
  }
  std::sort(ticks.begin(), ticks.end());
  return ticks;
}

void write_metadata(const fs::path& dir, const ordered_json& metadata) {
  write_file(dir / "metadata.json", metadata.dump(2) + "\n");
}

json read_metadata(const fs::path& dir) {
  const fs::path file = dir / "metadata.json";
  const std::string text = read_file(file);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(file, std::string("malformed metadata (") + e.what() + ")");
  }
}

}  // namespace advsim
