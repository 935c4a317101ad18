#include "advsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "advsim/errors.hpp"
#include "advsim/random.hpp"

namespace advsim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void schema(const std::string& path, const std::string& reason) {
  throw ConfigError(ConfigError::Kind::schema, path, reason);
}

[[noreturn]] void cross(const std::string& path, const std::string& reason) {
  throw ConfigError(ConfigError::Kind::cross_field, path, reason);
}

// Typed, path-aware accessors over one JSON object.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) schema(path_.empty() ? "/" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const std::string& key) const { return j_.at(key); }

  const json& require(const std::string& key) const {
    if (!has(key)) schema(at(key), "required field missing");
    return j_.at(key);
  }

  double number(const std::string& key) const {
    const json& v = require(key);
    if (!v.is_number()) schema(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) schema(at(key), "expected a finite number");
    return d;
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::uint64_t count(const std::string& key) const {
    const json& v = require(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      schema(at(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? count(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) schema(at(key), "expected a boolean");
    return v.get<bool>();
  }

  std::string string(const std::string& key) const {
    const json& v = require(key);
    if (!v.is_string()) schema(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key, std::size_t n) const {
    const json& v = require(key);
    if (!v.is_array() || v.size() != n) schema(at(key), "expected an array of " + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
      if (!v[i].is_number()) schema(at(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  Vec3 vec3(const std::string& key) const {
    const auto v = numbers(key, 3);
    return {v[0], v[1], v[2]};
  }

  std::vector<std::string> strings(const std::string& key) const {
    if (!has(key)) return {};
    const json& v = j_.at(key);
    if (!v.is_array()) schema(at(key), "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) schema(at(key) + "/" + std::to_string(i), "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

// True when ratio is within 1e-9 (relative) of an integer.
bool integral_ratio(double num, double den, double& rounded) {
  const double r = num / den;
  rounded = std::round(r);
  return std::abs(r - rounded) <= 1e-9 * std::max(1.0, std::abs(r));
}

ActivationWindow parse_window(const Fields& f) {
  ActivationWindow w;
  w.start_s = f.number("start_s", 0.0);
  if (f.has("end_s")) w.end_s = f.number("end_s");
  if (w.end_s < w.start_s) cross(f.at("end_s"), "end_s precedes start_s");
  return w;
}

std::vector<std::string> parse_targets(const Fields& f, const ScenarioConfig* config) {
  auto targets = f.strings("targets");
  if (config == nullptr) return targets;
  if (targets.empty()) {
    for (const auto& v : config->vehicles) {
      if (v.is_attacker) targets.push_back(v.id);
    }
    if (targets.empty()) cross(f.at("targets"), "no targets given and no vehicle is flagged is_attacker");
  }
  for (const auto& t : targets) {
    const bool known = std::any_of(config->vehicles.begin(), config->vehicles.end(),
                                   [&](const VehicleSpec& v) { return v.id == t; });
    if (!known) cross(f.at("targets"), "unknown vehicle id '" + t + "'");
  }
  return targets;
}

GradientNorm parse_norm(const Fields& f) {
  const std::string n = f.string("normalization", "global");
  if (n == "global") return GradientNorm::global;
  if (n == "per_point") return GradientNorm::per_point;
  schema(f.at("normalization"), "expected \"global\" or \"per_point\"");
}

const char* to_string(GradientNorm n) { return n == GradientNorm::global ? "global" : "per_point"; }

// Param-level validation failures are schema errors on the params object.
template <typename Fn>
void checked(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ParameterError& e) {
    schema(path, e.what());
  }
}

SensorSpec parse_sensor(const json& j, const std::string& path) {
  const Fields f(j, path);
  if (f.string("kind", "lidar") != "lidar") schema(f.at("kind"), "only \"lidar\" sensors are supported");
  SensorSpec s;
  s.channels = f.count("channels", s.channels);
  s.rotation_hz = f.number("rotation_hz", s.rotation_hz);
  s.range_m = f.number("range_m", s.range_m);
  s.points_per_channel = f.count("points_per_channel", s.points_per_channel);
  if (f.has("vertical_fov")) {
    const auto fov = f.numbers("vertical_fov", 2);
    s.fov_min_deg = fov[0];
    s.fov_max_deg = fov[1];
  }
  if (f.has("mount_offset")) s.mount_offset = f.vec3("mount_offset");
  s.noise_sigma_m = f.number("noise_sigma_m", s.noise_sigma_m);
  if (!(s.range_m > 0.0)) schema(f.at("range_m"), "must be > 0");
  if (s.channels < 1) schema(f.at("channels"), "must be >= 1");
  if (s.points_per_channel < 1) schema(f.at("points_per_channel"), "must be >= 1");
  if (!(s.fov_min_deg < s.fov_max_deg)) schema(f.at("vertical_fov"), "min must be < max");
  if (!(s.noise_sigma_m >= 0.0)) schema(f.at("noise_sigma_m"), "must be >= 0");
  if (!(s.rotation_hz > 0.0)) schema(f.at("rotation_hz"), "must be > 0");
  return s;
}

VehicleSpec parse_vehicle(const json& j, const std::string& path) {
  const Fields f(j, path);
  VehicleSpec v;
  v.id = f.string("id");
  if (v.id.empty()) schema(f.at("id"), "must not be empty");
  if (v.id.rfind("ghost:", 0) == 0) schema(f.at("id"), "the \"ghost:\" prefix is reserved for Sybil identities");
  const json& route = f.require("route");
  if (!route.is_array() || route.size() < 2) schema(f.at("route"), "expected at least 2 waypoints");
  for (std::size_t i = 0; i < route.size(); ++i) {
    const std::string wp = f.at("route") + "/" + std::to_string(i);
    if (!route[i].is_array() || route[i].size() != 2 || !route[i][0].is_number() || !route[i][1].is_number()) {
      schema(wp, "expected [x, y]");
    }
    v.route.push_back({route[i][0].get<double>(), route[i][1].get<double>()});
  }
  v.loop = f.boolean("loop", false);
  v.speed_mps = f.number("speed_mps", 0.0);
  if (!(v.speed_mps >= 0.0)) schema(f.at("speed_mps"), "must be >= 0");
  v.dims.length = f.number("length", v.dims.length);
  v.dims.width = f.number("width", v.dims.width);
  v.dims.height = f.number("height", v.dims.height);
  for (const char* k : {"length", "width", "height"}) {
    if (!(f.number(k, 1.0) > 0.0)) schema(f.at(k), "must be > 0");
  }
  v.is_ego = f.boolean("is_ego", false);
  v.is_attacker = f.boolean("is_attacker", false);
  return v;
}

CommSpec parse_comm(const json& j, const std::string& path) {
  const Fields f(j, path);
  CommSpec c;
  c.cam_interval_s = f.number("cam_interval_s", c.cam_interval_s);
  c.reception_radius_m = f.number("reception_radius_m", c.reception_radius_m);
  c.enabled = f.boolean("enabled", c.enabled);
  c.ldm_history = f.count("ldm_history", c.ldm_history);
  if (!(c.cam_interval_s > 0.0)) schema(f.at("cam_interval_s"), "must be > 0");
  if (!(c.reception_radius_m >= 0.0)) schema(f.at("reception_radius_m"), "must be >= 0");
  if (c.ldm_history < 1) schema(f.at("ldm_history"), "must be >= 1");
  return c;
}

}  // namespace

const char* to_string(AttackType t) {
  switch (t) {
    case AttackType::perturb: return "perturb";
    case AttackType::detach: return "detach";
    case AttackType::attach: return "attach";
    case AttackType::sybil: return "sybil";
    case AttackType::rba: return "rba";
    case AttackType::paa: return "paa";
    case AttackType::gps_spoof: return "gps_spoof";
  }
  return "?";
}

AttackType attack_type_from_string(std::string_view name) {
  for (AttackType t : {AttackType::perturb, AttackType::detach, AttackType::attach, AttackType::sybil,
                       AttackType::rba, AttackType::paa, AttackType::gps_spoof}) {
    if (name == to_string(t)) return t;
  }
  throw ParameterError("unknown attack type '" + std::string(name) + "'");
}

bool is_perception_attack(AttackType t) {
  return t == AttackType::perturb || t == AttackType::detach || t == AttackType::attach;
}

std::size_t ScenarioConfig::tick_count() const {
  if (duration_s <= 0.0) return 0;
  return static_cast<std::size_t>(std::llround(duration_s / dt_s));
}

const VehicleSpec& ScenarioConfig::ego() const {
  for (const auto& v : vehicles) {
    if (v.is_ego) return v;
  }
  throw ParameterError("scenario has no ego vehicle");
}

const SensorSpec& ScenarioConfig::lidar() const {
  if (sensors.empty()) throw ParameterError("scenario has no LiDAR sensor");
  return sensors.front();
}

bool ScenarioConfig::has_perception_attacks() const {
  return std::any_of(attacks.begin(), attacks.end(), [](const AttackSpec& a) { return is_perception_attack(a.type); });
}

DetectorModel parse_detector(const json& j, const std::string& path) {
  const Fields f(j, path);
  DetectorModel m;
  m.cell_size_m = f.number("cell_size_m", m.cell_size_m);
  m.bandwidth_m = f.number("bandwidth_m", m.bandwidth_m);
  m.weight = f.number("weight", m.weight);
  m.bias = f.number("bias", m.bias);
  m.score_threshold = f.number("score_threshold", m.score_threshold);
  if (f.has("box_template")) {
    const auto b = f.numbers("box_template", 3);
    m.box_template = {b[0], b[1], b[2]};
  }
  if (f.has("x_range")) {
    const auto r = f.numbers("x_range", 2);
    m.x_min = r[0];
    m.x_max = r[1];
  }
  if (f.has("y_range")) {
    const auto r = f.numbers("y_range", 2);
    m.y_min = r[0];
    m.y_max = r[1];
  }
  m.nms_iou = f.number("nms_iou", m.nms_iou);
  m.cutoff_sigmas = f.number("cutoff_sigmas", m.cutoff_sigmas);
  checked(path, [&] { m.validate(); });
  return m;
}

AttackSpec parse_attack(std::string_view type_name, const json& params, const ScenarioConfig* config,
                        std::uint64_t default_seed, const std::string& path) {
  AttackType type{};
  try {
    type = attack_type_from_string(type_name);
  } catch (const ParameterError& e) {
    schema(path, e.what());
  }
  const json empty = json::object();
  const Fields f(params.is_null() ? empty : params, path);
  const std::uint64_t seed = f.count("seed", default_seed);
  AttackSpec spec{type, {}};

  switch (type) {
    case AttackType::perturb: {
      PerturbParams p;
      p.epsilon_m = f.number("epsilon_m");
      p.steps = f.count("steps", p.steps);
      if (f.has("alpha_m")) p.alpha_m = f.number("alpha_m");
      p.lambda = f.number("lambda", p.lambda);
      p.seed = seed;
      p.normalization = parse_norm(f);
      checked(path, [&] { p.validate(); });
      spec.params = p;
      break;
    }
    case AttackType::detach: {
      DetachParams p;
      p.drop_ratio = f.number("drop_ratio");
      p.iterations = f.count("iterations", p.iterations);
      p.seed = seed;
      checked(path, [&] { p.validate(); });
      spec.params = p;
      break;
    }
    case AttackType::attach: {
      AttachParams p;
      p.k = f.count("k", p.k);
      p.epsilon_m = f.number("epsilon_m");
      p.steps = f.count("steps", p.steps);
      if (f.has("alpha_m")) p.alpha_m = f.number("alpha_m");
      p.lambda_chamfer = f.number("lambda_chamfer", p.lambda_chamfer);
      p.seed = seed;
      p.normalization = parse_norm(f);
      checked(path, [&] { p.validate(); });
      spec.params = p;
      break;
    }
    case AttackType::sybil: {
      SybilParams p;
      p.ghost_count = f.count("ghost_count", p.ghost_count);
      p.ring_radius_m = f.number("ring_radius_m", p.ring_radius_m);
      p.attacker = f.string("attacker", "");
      p.stationary = f.boolean("stationary", false);
      p.window = parse_window(f);
      p.seed = seed;
      if (p.ghost_count < 1) schema(f.at("ghost_count"), "must be >= 1");
      if (!(p.ring_radius_m >= 0.0)) schema(f.at("ring_radius_m"), "must be >= 0");
      if (config != nullptr) {
        if (p.attacker.empty()) {
          for (const auto& v : config->vehicles) {
            if (v.is_attacker) {
              p.attacker = v.id;
              break;
            }
          }
          if (p.attacker.empty()) cross(f.at("attacker"), "no attacker given and no vehicle is flagged is_attacker");
        }
        const bool known = std::any_of(config->vehicles.begin(), config->vehicles.end(),
                                       [&](const VehicleSpec& v) { return v.id == p.attacker; });
        if (!known) cross(f.at("attacker"), "unknown vehicle id '" + p.attacker + "'");
      }
      spec.params = p;
      break;
    }
    case AttackType::rba: {
      RbaParams p;
      p.delta_m = f.vec3("delta_m");
      p.targets = parse_targets(f, config);
      p.redraw_per_message = f.boolean("redraw_per_message", false);
      p.window = parse_window(f);
      p.seed = seed;
      if (!(p.delta_m.x >= 0.0 && p.delta_m.y >= 0.0 && p.delta_m.z >= 0.0)) {
        schema(f.at("delta_m"), "bounds must be >= 0 componentwise");
      }
      spec.params = p;
      break;
    }
    case AttackType::paa: {
      PaaParams p;
      if (f.has("offset_m")) p.offset_m = f.vec3("offset_m");
      if (f.has("fabricate_at")) p.fabricate_at = f.vec3("fabricate_at");
      p.targets = parse_targets(f, config);
      p.plausibility_bound_m = f.number("plausibility_bound_m", p.plausibility_bound_m);
      p.window = parse_window(f);
      checked(path, [&] { p.validate(); });
      spec.params = p;
      break;
    }
    case AttackType::gps_spoof: {
      GpsSpoofParams p;
      p.bias_m = f.vec3("bias_m");
      p.heading_bias_rad = f.number("heading_bias_rad", 0.0);
      p.window = parse_window(f);
      spec.params = p;
      break;
    }
  }
  return spec;
}

ScenarioConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigError::Kind::syntax, "", "at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  const Fields f(doc, "");
  ScenarioConfig c;

  c.duration_s = f.number("duration_s");
  c.dt_s = f.number("dt_s");
  if (!(c.duration_s >= 0.0)) schema("/duration_s", "must be >= 0");
  if (!(c.dt_s > 0.0)) schema("/dt_s", "must be > 0");
  double ticks = 0.0;
  if (!integral_ratio(c.duration_s, c.dt_s, ticks)) {
    cross("/duration_s", "duration_s / dt_s is not an integral tick count");
  }

  const std::string mode = f.string("mode", "traffic_driven");
  if (mode == "traffic_driven") {
    c.mode = SyncMode::traffic_driven;
  } else if (mode == "world_driven") {
    c.mode = SyncMode::world_driven;
  } else {
    schema("/mode", "expected \"traffic_driven\" or \"world_driven\"");
  }
  c.seed = f.count("seed", 0);

  if (f.has("map")) {
    const Fields m(f.raw("map"), "/map");
    c.map.name = m.string("name", c.map.name);
    if (m.has("weather")) c.map.weather = f.raw("map").at("weather");
  }

  const json& vehicles = f.require("vehicles");
  if (!vehicles.is_array() || vehicles.empty()) schema("/vehicles", "expected a non-empty array");
  std::set<std::string> ids;
  std::size_t egos = 0;
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const std::string p = "/vehicles/" + std::to_string(i);
    VehicleSpec v = parse_vehicle(vehicles[i], p);
    if (!ids.insert(v.id).second) schema(p + "/id", "duplicate vehicle id '" + v.id + "'");
    egos += v.is_ego ? 1 : 0;
    c.vehicles.push_back(std::move(v));
  }
  if (egos != 1) schema("/vehicles", "exactly one vehicle must be flagged is_ego (found " + std::to_string(egos) + ")");

  if (f.has("sensors")) {
    const json& sensors = f.raw("sensors");
    if (!sensors.is_array()) schema("/sensors", "expected an array");
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      c.sensors.push_back(parse_sensor(sensors[i], "/sensors/" + std::to_string(i)));
    }
  }
  if (c.sensors.empty()) c.sensors.push_back(SensorSpec{});

  if (f.has("comm")) c.comm = parse_comm(f.raw("comm"), "/comm");
  double cam_ticks = 0.0;
  if (!integral_ratio(c.comm.cam_interval_s, c.dt_s, cam_ticks) || cam_ticks < 1.0) {
    cross("/comm/cam_interval_s", "cam_interval_s must be an integer multiple of dt_s");
  }

  if (f.has("detector")) c.detector = parse_detector(f.raw("detector"), "/detector");
  if (f.has("evaluation")) {
    const Fields e(f.raw("evaluation"), "/evaluation");
    c.iou_threshold = e.number("iou_threshold", c.iou_threshold);
    if (!(c.iou_threshold > 0.0 && c.iou_threshold <= 1.0)) schema("/evaluation/iou_threshold", "must lie in (0, 1]");
  }

  if (f.has("attacks")) {
    const json& attacks = f.raw("attacks");
    if (!attacks.is_array()) schema("/attacks", "expected an array");
    for (std::size_t i = 0; i < attacks.size(); ++i) {
      const std::string p = "/attacks/" + std::to_string(i);
      const Fields a(attacks[i], p);
      const std::string type = a.string("type");
      try {
        attack_type_from_string(type);
      } catch (const ParameterError& e) {
        schema(p + "/type", e.what());
      }
      const json params = a.has("params") ? a.raw("params") : json::object();
      c.attacks.push_back(parse_attack(type, params, &c, derive_seed(c.seed, "attack", i), p + "/params"));
    }
  }

  c.output_dir = f.string("output_dir", "");
  c.paired_output = f.boolean("paired_output", c.paired_output);
  c.barrier_timeout_s = f.number("barrier_timeout_s", c.barrier_timeout_s);
  if (!(c.barrier_timeout_s > 0.0)) schema("/barrier_timeout_s", "must be > 0");
  const std::string exec = f.string("execution", "threaded");
  if (exec == "threaded") {
    c.execution = ExecutionMode::threaded;
  } else if (exec == "sequential") {
    c.execution = ExecutionMode::sequential;
  } else {
    schema("/execution", "expected \"threaded\" or \"sequential\"");
  }
  return c;
}

ordered_json to_json(const DetectorModel& m) {
  return {{"cell_size_m", m.cell_size_m},
          {"bandwidth_m", m.bandwidth_m},
          {"weight", m.weight},
          {"bias", m.bias},
          {"score_threshold", m.score_threshold},
          {"box_template", {m.box_template.length, m.box_template.width, m.box_template.height}},
          {"x_range", {m.x_min, m.x_max}},
          {"y_range", {m.y_min, m.y_max}},
          {"nms_iou", m.nms_iou},
          {"cutoff_sigmas", m.cutoff_sigmas}};
}

ordered_json to_json(const SensorSpec& s) {
  return {{"kind", "lidar"},
          {"channels", s.channels},
          {"rotation_hz", s.rotation_hz},
          {"range_m", s.range_m},
          {"points_per_channel", s.points_per_channel},
          {"vertical_fov", {s.fov_min_deg, s.fov_max_deg}},
          {"mount_offset", {s.mount_offset.x, s.mount_offset.y, s.mount_offset.z}},
          {"noise_sigma_m", s.noise_sigma_m}};
}

namespace {

ordered_json vec_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

void add_window(ordered_json& j, const ActivationWindow& w) {
  j["start_s"] = w.start_s;
  if (std::isfinite(w.end_s)) j["end_s"] = w.end_s;
}

}  // namespace

ordered_json to_json(const AttackSpec& a) {
  ordered_json p = ordered_json::object();
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PerturbParams>) {
          p = {{"epsilon_m", v.epsilon_m}, {"steps", v.steps}, {"alpha_m", v.step_size()},
               {"lambda", v.lambda},       {"seed", v.seed},   {"normalization", to_string(v.normalization)}};
        } else if constexpr (std::is_same_v<T, DetachParams>) {
          p = {{"drop_ratio", v.drop_ratio}, {"iterations", v.iterations}, {"seed", v.seed}};
        } else if constexpr (std::is_same_v<T, AttachParams>) {
          p = {{"k", v.k},
               {"epsilon_m", v.epsilon_m},
               {"steps", v.steps},
               {"alpha_m", v.step_size()},
               {"lambda_chamfer", v.lambda_chamfer},
               {"seed", v.seed},
               {"normalization", to_string(v.normalization)}};
        } else if constexpr (std::is_same_v<T, SybilParams>) {
          p = {{"ghost_count", v.ghost_count}, {"ring_radius_m", v.ring_radius_m}, {"attacker", v.attacker},
               {"stationary", v.stationary},   {"seed", v.seed}};
          add_window(p, v.window);
        } else if constexpr (std::is_same_v<T, RbaParams>) {
          p = {{"delta_m", vec_json(v.delta_m)},
               {"targets", v.targets},
               {"redraw_per_message", v.redraw_per_message},
               {"seed", v.seed}};
          add_window(p, v.window);
        } else if constexpr (std::is_same_v<T, PaaParams>) {
          if (v.offset_m) p["offset_m"] = vec_json(*v.offset_m);
          if (v.fabricate_at) p["fabricate_at"] = vec_json(*v.fabricate_at);
          p["targets"] = v.targets;
          p["plausibility_bound_m"] = v.plausibility_bound_m;
          add_window(p, v.window);
        } else if constexpr (std::is_same_v<T, GpsSpoofParams>) {
          p = {{"bias_m", vec_json(v.bias_m)}, {"heading_bias_rad", v.heading_bias_rad}};
          add_window(p, v.window);
        }
      },
      a.params);
  return {{"type", to_string(a.type)}, {"params", p}};
}

ordered_json to_json(const ScenarioConfig& c) {
  ordered_json vehicles = ordered_json::array();
  for (const auto& v : c.vehicles) {
    ordered_json route = ordered_json::array();
    for (const Vec2& w : v.route) route.push_back({w.x, w.y});
    vehicles.push_back({{"id", v.id},
                        {"route", route},
                        {"loop", v.loop},
                        {"speed_mps", v.speed_mps},
                        {"length", v.dims.length},
                        {"width", v.dims.width},
                        {"height", v.dims.height},
                        {"is_ego", v.is_ego},
                        {"is_attacker", v.is_attacker}});
  }
  ordered_json sensors = ordered_json::array();
  for (const auto& s : c.sensors) sensors.push_back(to_json(s));
  ordered_json attacks = ordered_json::array();
  for (const auto& a : c.attacks) attacks.push_back(to_json(a));
  return {{"duration_s", c.duration_s},
          {"dt_s", c.dt_s},
          {"mode", c.mode == SyncMode::traffic_driven ? "traffic_driven" : "world_driven"},
          {"seed", c.seed},
          {"map", {{"name", c.map.name}, {"weather", c.map.weather}}},
          {"vehicles", vehicles},
          {"sensors", sensors},
          {"comm",
           {{"cam_interval_s", c.comm.cam_interval_s},
            {"reception_radius_m", c.comm.reception_radius_m},
            {"enabled", c.comm.enabled},
            {"ldm_history", c.comm.ldm_history}}},
          {"attacks", attacks},
          {"detector", to_json(c.detector)},
          {"evaluation", {{"iou_threshold", c.iou_threshold}}},
          {"output_dir", c.output_dir},
          {"paired_output", c.paired_output},
          {"barrier_timeout_s", c.barrier_timeout_s},
          {"execution", c.execution == ExecutionMode::threaded ? "threaded" : "sequential"}};
}

}  // namespace advsim
