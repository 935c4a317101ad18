// Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "advsim/bev.hpp"
#include "advsim/dataset.hpp"
#include "advsim/evaluation.hpp"
#include "advsim/metrics.hpp"
#include "advsim/orchestrator.hpp"
#include "advsim/perception_attack.hpp"
#include "advsim/scenario.hpp"
#include "cli.hpp"
#include "protocol_check.hpp"
#include "support.hpp"

using namespace advsim;
using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string join(const std::vector<double>& v, const char* f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(f, v[i]);
  return s;
}

// Count of i with v[i+1] > v[i].
std::size_t inversions(const std::vector<double>& v) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) n += v[i + 1] > v[i];
  return n;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (!(v[i + 1] > v[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------- 1
Verdict gradient_correctness() {
  const auto t0 = Clock::now();
  Rng pick(2024);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    DetectorModel m;
    m.bandwidth_m = pick.uniform(0.4, 1.5);
    m.cell_size_m = pick.uniform(0.8, 2.5);
    m.bias = pick.uniform(-6.0, -1.0);
    const auto n = static_cast<std::size_t>(pick.uniform(20.0, 500.0));
    const auto scene = test::desk_scene(1000 + s, n, pick.uniform(0.1, 0.9));
    const auto analytic = loss_gradient(m, scene.cloud, scene.gt);
    const auto fd = test::finite_difference(
        scene.cloud, [&](const PointCloud& c) { return detection_loss(m, c, scene.gt); }, 1e-4);
    worst = std::max(worst, test::max_norm_relative_error(analytic, fd));
  }
  const double t = seconds_since(t0);
  return {worst < 1e-4 && t < 30.0, "20 scenes, max relative error " + fmt("%.2e", worst) + ", " + fmt("%.1f", t) + " s"};
}

// ---------------------------------------------------------------- 2
Verdict chamfer_oracle() {
  Rng rng(77);
  double worst = 0.0;
  bool self_zero = true;
  for (int t = 0; t < 100; ++t) {
    auto make = [&] {
      PointCloud c;
      const auto n = 1 + static_cast<std::size_t>(rng.uniform(0.0, 200.0));
      const double extent = rng.uniform(0.1, 50.0);
      for (std::size_t i = 0; i < n; ++i) {
        c.points.push_back({rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-2.0, 2.0)});
      }
      return c;
    };
    const PointCloud p = make(), q = make();
    double a = 0.0, b = 0.0;
    for (const Vec3& x : p.points) {
      double best = INFINITY;
      for (const Vec3& y : q.points) best = std::min(best, (x.x - y.x) * (x.x - y.x) + (x.y - y.y) * (x.y - y.y) + (x.z - y.z) * (x.z - y.z));
      a += best;
    }
    for (const Vec3& y : q.points) {
      double best = INFINITY;
      for (const Vec3& x : p.points) best = std::min(best, (x.x - y.x) * (x.x - y.x) + (x.y - y.y) * (x.y - y.y) + (x.z - y.z) * (x.z - y.z));
      b += best;
    }
    const double brute = a / p.size() + b / q.size();
    worst = std::max(worst, std::abs(chamfer(p, q) - brute));
    self_zero = self_zero && chamfer(p, p) == 0.0 && chamfer(q, q) == 0.0;
  }
  return {worst <= 1e-12 && self_zero,
          "100 pairs, max |fast - brute| " + fmt("%.1e", worst) + (self_zero ? ", CD(P,P) = 0" : ", CD(P,P) != 0")};
}

// ---------------------------------------------------------------- 3
Verdict clip_exactness() {
  Rng rng(3);
  std::size_t bad = 0, clipped = 0;
  double worst_cos = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double scale = std::pow(10.0, rng.uniform(-6.0, 3.0));
    const Vec3 d{scale * rng.normal(), scale * rng.normal(), scale * rng.normal()};
    const double eps = std::pow(10.0, rng.uniform(-6.0, 3.0));
    const Vec3 c = clip_displacement(d, eps);
    const double nc = std::sqrt(c.x * c.x + c.y * c.y + c.z * c.z);
    const double nd = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    if (nc > eps) ++bad;
    if (nd > eps) {
      ++clipped;
      const double cosine = (c.x * d.x + c.y * d.y + c.z * d.z) / (nc * nd);
      worst_cos = std::max(worst_cos, std::abs(cosine - 1.0));
    } else if (!(c == d)) {
      ++bad;
    }
  }
  const Vec3 tri = clip_displacement({3.0, 4.0, 0.0}, 2.5);
  const bool exact = tri.x == 1.5 && tri.y == 2.0 && tri.z == 0.0;
  return {bad == 0 && worst_cos <= 1e-12 && exact,
          "1000 cases (" + std::to_string(clipped) + " clipped), norm violations " + std::to_string(bad) +
              ", max |cos - 1| " + fmt("%.1e", worst_cos) + (exact ? ", 3-4-5 -> (1.5, 2, 0)" : ", 3-4-5 inexact")};
}

// ---------------------------------------------------------------- 4-6
struct SceneData {
  ScenarioConfig config;
  std::vector<FrameRecord> frames;
  double seconds = 0.0;
};

const SceneData& acceptance_scene() {
  static const SceneData data = [] {
    SceneData d;
    d.config = parse_config(test::read_bytes(fs::path(ADVSIM_TEST_DATA_DIR) / "acceptance_scene.json"));
    const auto t0 = Clock::now();
    CallbackSink sink([&](const FrameBundle& b) { d.frames.push_back(b.frame); });
    FrameSink* sinks[] = {&sink};
    run_session(d.config, sinks);
    d.seconds = seconds_since(t0);
    return d;
  }();
  return data;
}

double perturb_cd_at_10cm = NAN;

Verdict perturbation_trend() {
  const SceneData& s = acceptance_scene();
  const SurrogateDetector det(s.config.detector);
  SweepSpec spec;
  spec.type = AttackType::perturb;
  spec.values = default_sweep_values(AttackType::perturb);
  spec.base_params = {{"normalization", "per_point"}, {"lambda", 0.0}};
  const auto t0 = Clock::now();
  const auto r = run_sweep(det, s.frames, spec, s.config.iou_threshold);
  const double t = seconds_since(t0) + s.seconds;
  std::vector<double> ratio, cd;
  for (const auto& row : r.rows) {
    ratio.push_back(row.map_ratio);
    cd.push_back(row.mean_cd);
  }
  perturb_cd_at_10cm = cd.back();
  const bool trend = inversions(ratio) <= 1;
  const bool drop = ratio.back() <= ratio.front() - 5.0;
  const bool cd_up = strictly_increasing(cd);
  return {s.frames.size() == 100 && trend && drop && cd_up && t < 300.0,
          std::to_string(s.frames.size()) + " frames, ratio [" + join(ratio, "%.2f") + "], inversions " +
              std::to_string(inversions(ratio)) + ", drop " + fmt("%.2f", ratio.front() - ratio.back()) + " pp, CD [" +
              join(cd, "%.6f") + "]" + (cd_up ? " increasing" : " NOT increasing") + ", " + fmt("%.0f", t) + " s"};
}

// Decimal ratios as exact fractions, so floor(N * ratio) is integer math.
struct Fraction {
  std::size_t num, den;
};

Verdict detachment_trend() {
  const SceneData& s = acceptance_scene();
  const SurrogateDetector det(s.config.detector);
  SweepSpec spec;
  spec.type = AttackType::detach;
  spec.values = default_sweep_values(AttackType::detach);
  const std::vector<Fraction> exact{{5, 10000}, {1, 1000}, {3, 1000}, {5, 1000}, {1, 100}, {15, 1000}};
  const auto t0 = Clock::now();
  const auto r = run_sweep(det, s.frames, spec, s.config.iou_threshold, true);
  const double t = seconds_since(t0);
  std::vector<double> ratio;
  for (const auto& row : r.rows) ratio.push_back(row.map_ratio);

  std::size_t count_errors = 0;
  for (std::size_t v = 0; v < spec.values.size(); ++v) {
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      const std::size_t n = s.frames[i].point_cloud.size();
      const std::size_t m = n * exact[v].num / exact[v].den;
      count_errors += r.adversarial[v][i].size() != n - m;
    }
  }

  // Single-cluster scenes: one car among sparse background.
  std::size_t inside = 0, removed = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto scene = test::desk_scene(seed, 1000, 0.9);
    DetachParams p;
    p.drop_ratio = 0.01;
    const auto out = detach_attack(SurrogateDetector{DetectorModel{}}, scene.cloud, scene.gt, p);
    for (std::size_t idx : out.removed) inside += test::inside_box(scene.gt[0], scene.cloud[idx], 1e-9);
    removed += out.removed.size();
  }
  const double share = removed ? static_cast<double>(inside) / static_cast<double>(removed) : 0.0;
  return {inversions(ratio) <= 1 && count_errors == 0 && share >= 0.8 && removed == 50,
          "ratio [" + join(ratio, "%.2f") + "], inversions " + std::to_string(inversions(ratio)) +
              ", removed-count mismatches " + std::to_string(count_errors) + "/" +
              std::to_string(spec.values.size() * s.frames.size()) + ", cluster share " + std::to_string(inside) + "/" +
              std::to_string(removed) + ", " + fmt("%.0f", t) + " s"};
}

Verdict attachment_trend() {
  const SceneData& s = acceptance_scene();
  const SurrogateDetector det(s.config.detector);
  SweepSpec spec;
  spec.type = AttackType::attach;
  spec.values = default_sweep_values(AttackType::attach);
  const auto t0 = Clock::now();
  const auto r = run_sweep(det, s.frames, spec, s.config.iou_threshold, true);
  const double t = seconds_since(t0);
  std::vector<double> ratio, cd;
  for (const auto& row : r.rows) {
    ratio.push_back(row.map_ratio);
    cd.push_back(row.mean_cd);
  }
  double worst_excess = -INFINITY;
  std::size_t checked = 0, not_copies = 0;
  for (std::size_t v = 0; v < spec.values.size(); ++v) {
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      const PointCloud& clean = s.frames[i].point_cloud;
      const PointCloud& adv = r.adversarial[v][i];
      const auto& from = r.injected_from[v][i];
      std::set<std::tuple<double, double, double>> originals;
      for (const Vec3& p : clean.points) originals.insert({p.x, p.y, p.z});
      for (std::size_t j = 0; j < from.size(); ++j) {
        const Vec3 d = adv[clean.size() + j] - from[j];
        worst_excess = std::max(worst_excess, std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z) - spec.values[v]);
        not_copies += originals.count({from[j].x, from[j].y, from[j].z}) == 0;
        ++checked;
      }
    }
  }
  const double max_cd = *std::max_element(cd.begin(), cd.end());
  const bool below = max_cd < perturb_cd_at_10cm;
  return {inversions(ratio) <= 1 && below && worst_excess <= 1e-9 && not_copies == 0 && checked > 0,
          "ratio [" + join(ratio, "%.2f") + "], inversions " + std::to_string(inversions(ratio)) + ", max CD " +
              fmt("%.6f", max_cd) + (below ? " < " : " >= ") + fmt("%.6f", perturb_cd_at_10cm) +
              " (perturb 10 cm), " + std::to_string(checked) + " injections, max |shift| - eps " +
              fmt("%.1e", worst_excess) + ", " + fmt("%.0f", t) + " s"};
}

// ---------------------------------------------------------------- 7
json random_config(Rng& rng, std::size_t index) {
  static const double dts[] = {0.05, 0.1, 0.2};
  const double dt = dts[static_cast<std::size_t>(rng.uniform(0.0, 3.0))];
  const auto ticks = static_cast<std::size_t>(rng.uniform(0.0, 16.0));
  json c;
  c["duration_s"] = static_cast<double>(ticks) * dt;
  c["dt_s"] = dt;
  c["seed"] = index;
  c["vehicles"] = json::array();
  c["vehicles"].push_back({{"id", "ego"},
                           {"route", {{0, 0}, {rng.uniform(50, 400), rng.uniform(-20, 20)}}},
                           {"speed_mps", rng.uniform(0, 20)},
                           {"is_ego", true}});
  const auto others = static_cast<std::size_t>(rng.uniform(0.0, 7.0));
  for (std::size_t i = 0; i < others; ++i) {
    json route = json::array();
    const auto wps = 2 + static_cast<std::size_t>(rng.uniform(0.0, 3.0));
    for (std::size_t w = 0; w < wps; ++w) route.push_back({rng.uniform(-60, 60), rng.uniform(-60, 60)});
    c["vehicles"].push_back({{"id", "v" + std::to_string(i)},
                             {"route", route},
                             {"loop", rng.uniform() < 0.3},
                             {"speed_mps", rng.uniform() < 0.2 ? 0.0 : rng.uniform(1, 25)},
                             {"is_attacker", i == 0}});
  }
  c["sensors"] = {{{"kind", "lidar"}, {"channels", 4}, {"points_per_channel", 36}, {"range_m", 80}}};
  c["comm"] = {{"cam_interval_s", dt * (1 + static_cast<int>(rng.uniform(0.0, 3.0)))}};
  if (others > 0 && rng.uniform() < 0.5) {
    c["attacks"] = {{{"type", "sybil"}, {"params", {{"ghost_count", 2}}}},
                    {{"type", "rba"}, {"params", {{"delta_m", {1, 1, 0}}}}}};
  }
  return c;
}

Verdict lockstep_protocol() {
  Rng rng(4242);
  std::size_t runs = 0, failures = 0;
  std::string first;
  for (std::size_t i = 0; i < 50; ++i) {
    const json base = random_config(rng, i);
    for (const char* mode : {"traffic_driven", "world_driven"}) {
      for (const char* exec : {"sequential", "threaded"}) {
        json c = base;
        c["mode"] = mode;
        c["execution"] = exec;
        const ScenarioConfig cfg = parse_config(c.dump());
        test::ProtocolTrace trace;
        SessionOptions opts;
        trace.attach(opts);
        std::vector<FrameRecord> frames;
        CallbackSink sink([&](const FrameBundle& b) { frames.push_back(b.frame); });
        FrameSink* sinks[] = {&sink};
        std::vector<std::string> problems;
        try {
          run_session(cfg, sinks, opts);
          problems = trace.problems(cfg.tick_count());
          for (std::size_t k = 0; k < frames.size(); ++k) {
            if (frames[k].tick_index != k) problems.push_back("frame " + std::to_string(k) + " out of order");
          }
          if (frames.size() != cfg.tick_count()) problems.push_back("frame count");
        } catch (const std::exception& e) {
          problems.push_back(e.what());
        }
        ++runs;
        if (!problems.empty()) {
          ++failures;
          if (first.empty()) first = "config " + std::to_string(i) + " " + mode + "/" + exec + ": " + problems[0];
        }
      }
    }
  }
  return {failures == 0, "50 configs x 2 modes x 2 executions = " + std::to_string(runs) + " runs, " +
                             std::to_string(failures) + " with violations" + (first.empty() ? "" : " (" + first + ")")};
}

// ---------------------------------------------------------------- 8
int cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "advsim");
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

Verdict determinism() {
  const auto root = test::fresh_dir("acc_determinism");
  std::vector<std::string> notes;
  bool ok = true;
  const auto check = [&](const std::string& name, json config) {
    const fs::path cfg = root / (name + ".json");
    write_file(cfg, config.dump(2));
    const int a = cli_run({"simulate", "--config", cfg.string(), "--out", (root / (name + "_a")).string()});
    const int b = cli_run({"simulate", "--config", cfg.string(), "--out", (root / (name + "_b")).string()});
    const auto ha = test::hash_directory(root / (name + "_a"));
    const auto hb = test::hash_directory(root / (name + "_b"));
    const bool same = a == 0 && b == 0 && ha == hb;
    ok = ok && same;
    std::ostringstream s;
    s << name << " " << std::hex << ha << (same ? " == " : " != ") << hb;
    notes.push_back(s.str());
  };
  check("plain", test::small_scene(1.0, 0.1));
  json attacked = test::small_scene(1.0, 0.1);
  attacked["execution"] = "threaded";
  attacked["attacks"] = {{{"type", "perturb"}, {"params", {{"epsilon_m", 0.05}, {"steps", 5}}}},
                         {{"type", "attach"}, {"params", {{"k", 20}, {"epsilon_m", 0.3}, {"steps", 5}}}},
                         {{"type", "sybil"}, {"params", json::object()}},
                         {{"type", "rba"}, {"params", {{"delta_m", {2, 2, 0}}}}},
                         {{"type", "gps_spoof"}, {"params", {{"bias_m", {3, -2, 0}}, {"start_s", 0.3}}}}};
  check("attacked", attacked);
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : ", ") + n;
  return {ok, detail};
}

// ---------------------------------------------------------------- 9
struct Session {
  std::vector<FrameBundle> bundles;
};

Session run_bundles(const json& c) {
  Session s;
  CallbackSink sink([&](const FrameBundle& b) { s.bundles.push_back(b); });
  FrameSink* sinks[] = {&sink};
  run_session(parse_config(c.dump()), sinks);
  return s;
}

json comm_scene(double duration) {
  json c = test::small_scene(duration, 0.1);
  c["sensors"] = {{{"kind", "lidar"}, {"channels", 2}, {"points_per_channel", 8}}};
  for (int i = 4; i < 7; ++i) {
    c["vehicles"].push_back({{"id", "car" + std::to_string(i)},
                             {"route", {{10.0 * i, 7}, {600, 7}}},
                             {"speed_mps", 5 + i},
                             {"is_attacker", true}});
  }
  return c;  // attackers: car2, car4, car5, car6
}

Verdict comm_bounds() {
  std::vector<std::string> notes;
  bool ok = true;

  // RBA: 4 targets over 250 CAM ticks = 1000 messages.
  {
    json c = comm_scene(25.0);
    const Vec3 delta{2.0, 1.5, 0.5};
    c["attacks"] = {{{"type", "rba"}, {"params", {{"delta_m", {delta.x, delta.y, delta.z}}}}}};
    const Session s = run_bundles(c);
    std::size_t messages = 0, out_of_bounds = 0, drifted = 0;
    std::map<std::string, Vec3> held;
    for (const auto& b : s.bundles) {
      for (std::size_t i = 0; i < b.frame.cams_emitted.size(); ++i) {
        const CamMessage& adv = b.frame.cams_emitted[i];
        const CamMessage& clean = b.clean->cams_emitted[i];
        const Vec3 e = adv.position - clean.position;
        if (e == Vec3{}) continue;
        ++messages;
        out_of_bounds += std::abs(e.x) > delta.x || std::abs(e.y) > delta.y || std::abs(e.z) > delta.z;
        auto [it, fresh] = held.emplace(adv.station_id, e);
        // Differences of large coordinates round; compare at 1e-9.
        if (!fresh && norm(it->second - e) > 1e-9) ++drifted;
      }
    }
    const bool pass = messages >= 1000 && out_of_bounds == 0 && drifted == 0 && held.size() == 4;
    ok = ok && pass;
    notes.push_back("RBA " + std::to_string(messages) + " msgs, " + std::to_string(out_of_bounds) + " out of bounds, " +
                    std::to_string(drifted) + " bias changes");
  }
  // PAA: every altered position moves by more than the plausibility bound.
  {
    json c = comm_scene(2.0);
    const double rho = 10.0;
    c["attacks"] = {{{"type", "paa"}, {"params", {{"offset_m", {8, -9, 0}}, {"plausibility_bound_m", rho}}}}};
    const Session s = run_bundles(c);
    std::size_t altered = 0, small = 0;
    for (const auto& b : s.bundles) {
      for (std::size_t i = 0; i < b.frame.cams_emitted.size(); ++i) {
        const double d = norm(b.frame.cams_emitted[i].position - b.clean->cams_emitted[i].position);
        if (d == 0.0) continue;
        ++altered;
        small += !(d > rho);
      }
    }
    const bool pass = altered == 4 * s.bundles.size() && small == 0;
    ok = ok && pass;
    notes.push_back("PAA " + std::to_string(altered) + " altered, " + std::to_string(small) + " within rho");
  }
  // Sybil: three ghosts in every in-range receiver's LDM, no id collisions.
  {
    json c = comm_scene(2.0);
    c["attacks"] = {{{"type", "sybil"}, {"params", {{"ghost_count", 3}, {"attacker", "car4"}}}}};
    const double radius = 300.0;
    const Session s = run_bundles(c);
    std::size_t receivers = 0, wrong = 0, collisions = 0;
    for (const auto& b : s.bundles) {
      std::set<std::string> real;
      for (const auto& v : b.frame.vehicle_states) real.insert(v.id);
      std::vector<CamMessage> ghosts;
      std::set<std::string> ghost_ids;
      for (const auto& cam : b.frame.cams_emitted) {
        if (real.count(cam.station_id)) continue;
        ghosts.push_back(cam);
        ghost_ids.insert(cam.station_id);
      }
      collisions += ghosts.size() - ghost_ids.size();
      for (const auto& ldm : b.frame.ldms) {
        if (ldm.owner_id == "car4") continue;
        const auto& owner = *std::find_if(b.frame.vehicle_states.begin(), b.frame.vehicle_states.end(),
                                          [&](const VehicleState& v) { return v.id == ldm.owner_id; });
        bool in_range = true;
        for (const auto& g : ghosts) in_range = in_range && norm(g.position - owner.position) <= radius;
        if (!in_range) continue;
        ++receivers;
        std::size_t seen = 0;
        for (const auto& [id, entry] : ldm.entries) {
          if (ghost_ids.count(id)) ++seen;
          collisions += real.count(id) && id.rfind("ghost:", 0) == 0;
        }
        wrong += seen != 3;
      }
      wrong += ghosts.size() != 3;
    }
    const bool pass = receivers > 0 && wrong == 0 && collisions == 0;
    ok = ok && pass;
    notes.push_back("Sybil " + std::to_string(receivers) + " receiver-frames, " + std::to_string(wrong) +
                    " without exactly 3 ghosts, " + std::to_string(collisions) + " collisions");
  }
  // GPS spoofing: sensing output byte-identical to the clean run.
  {
    const auto root = test::fresh_dir("acc_gps");
    json clean = test::small_scene(1.0, 0.1);
    json spoof = clean;
    spoof["attacks"] = {{{"type", "gps_spoof"}, {"params", {{"bias_m", {3, -2, 0}}, {"heading_bias_rad", 0.05}}}}};
    for (const auto& [name, cfg] : {std::pair{"clean", clean}, std::pair{"spoof", spoof}}) {
      const ScenarioConfig sc = parse_config(cfg.dump());
      DirectorySink sink(root / name, sc);
      FrameSink* sinks[] = {&sink};
      run_session(sc, sinks);
    }
    std::size_t differing = 0, frames = 0, poses_moved = 0;
    for (std::size_t t : list_frame_ticks(root / "clean")) {
      ++frames;
      const std::string stem = tick_stem(t);
      differing += test::read_bytes(root / "clean" / (stem + ".bin")) != test::read_bytes(root / "spoof" / (stem + ".bin"));
      const json a = json::parse(test::read_bytes(root / "clean" / (stem + ".json")));
      const json b = json::parse(test::read_bytes(root / "spoof" / (stem + ".json")));
      differing += a["gt_boxes"].dump() != b["gt_boxes"].dump();
      poses_moved += a["ego_to_world"] != b["ego_to_world"];
    }
    const bool pass = frames == 10 && differing == 0 && poses_moved == frames;
    ok = ok && pass;
    notes.push_back("GPS " + std::to_string(frames) + " frames, " + std::to_string(differing) +
                    " differing cloud/box files, spoofed pose in " + std::to_string(poses_moved));
  }
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return {ok, detail};
}

// ---------------------------------------------------------------- 10
BBox3D box_at(double x, double y) {
  BBox3D b;
  b.center = {x, y, 0.8};
  return b;
}

Detection scored(const BBox3D& b, double s) {
  Detection d;
  d.box = b;
  d.score = s;
  return d;
}

Verdict metric_oracles() {
  const std::vector<FrameBoxes> gt{{box_at(10, 0)}, {box_at(20, 5)}, {box_at(30, -5)}};
  std::vector<FrameDetections> perfect;
  for (const auto& f : gt) perfect.push_back({scored(f[0], 1.0)});
  const double ap_perfect = average_precision(perfect, gt);
  const double ap_empty = average_precision(std::vector<FrameDetections>(3), gt);
  // Ranked TP (0.9), FP (0.8), TP (0.7) over 3 GT: 1/3 * 1 + 1/3 * 2/3.
  const std::vector<FrameDetections> micro{
      {scored(box_at(10.2, 0), 0.9)}, {scored(box_at(50, 30), 0.8)}, {scored(box_at(30, -5.1), 0.7)}};
  const double ap_micro = average_precision(micro, gt);
  const double ratio = map_ratio(micro, micro, gt);
  const bool ok = ap_perfect == 1.0 && ap_empty == 0.0 && std::abs(ap_micro - 5.0 / 9.0) <= 1e-12 && ratio == 100.0;
  return {ok, "AP perfect " + fmt("%.3f", ap_perfect) + ", empty " + fmt("%.3f", ap_empty) + ", micro " +
                  fmt("%.15f", ap_micro) + " vs 5/9, ratio(adv = clean) " + fmt("%.3f", ratio)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"chamfer oracle", chamfer_oracle},
      {"clip exactness", clip_exactness},
      {"perturbation trend", perturbation_trend},
      {"detachment trend", detachment_trend},
      {"attachment trend", attachment_trend},
      {"lockstep protocol", lockstep_protocol},
      {"determinism", determinism},
      {"communication attack bounds", comm_bounds},
      {"metrics micro-oracles", metric_oracles},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
