#include "advsim/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "advsim/bev.hpp"
#include "advsim/dataset.hpp"
#include "advsim/errors.hpp"
#include "advsim/orchestrator.hpp"

namespace advsim {

namespace fs = std::filesystem;
using nlohmann::json;

Dataset load_dataset(const fs::path& dir) {
  Dataset d;
  d.dir = dir;
  for (std::size_t tick : list_frame_ticks(dir)) d.frames.push_back(load_frame(dir, tick));
  if (fs::exists(dir / "metadata.json")) d.metadata = read_metadata(dir);
  return d;
}

DetectorModel dataset_detector(const json& metadata) {
  if (metadata.is_object() && metadata.contains("detector")) return parse_detector(metadata.at("detector"));
  return {};
}

double dataset_iou_threshold(const json& metadata) {
  if (metadata.is_object() && metadata.contains("iou_threshold")) return metadata.at("iou_threshold").get<double>();
  return 0.5;
}

void require_same_ticks(const Dataset& clean, const Dataset& adversarial) {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
  for (const auto& f : clean.frames) a.push_back(f.tick_index);
  for (const auto& f : adversarial.frames) b.push_back(f.tick_index);
  if (a == b) return;
  std::vector<std::size_t> only_clean;
  std::vector<std::size_t> only_adv;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_clean));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_adv));
  auto list = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return "{" + s + "}";
  };
  throw Error("tick sets differ: missing from adversarial " + list(only_clean) + ", missing from clean " +
              list(only_adv));
}

FrameBoxes evaluable_boxes(const DetectorModel& model, std::span<const BBox3D> boxes) {
  FrameBoxes out;
  for (const BBox3D& b : boxes) {
    if (b.center.x >= model.x_min && b.center.x <= model.x_max && b.center.y >= model.y_min &&
        b.center.y <= model.y_max) {
      out.push_back(b);
    }
  }
  return out;
}

ReportRow evaluate_clouds(const Detector& detector, std::span<const PointCloud> clean,
                          std::span<const PointCloud> adversarial, std::span<const FrameBoxes> gt,
                          double iou_threshold) {
  if (clean.size() != adversarial.size() || clean.size() != gt.size()) {
    throw ParameterError("clean, adversarial and ground-truth frame counts differ");
  }
  std::vector<FrameDetections> det_clean;
  std::vector<FrameDetections> det_adv;
  double cd = 0.0;
  std::size_t cd_frames = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    det_clean.push_back(detector.detect(clean[i]));
    det_adv.push_back(detector.detect(adversarial[i]));
    // Two empty clouds are identical (CD 0); one empty side has no CD at
    // all and is left out of the mean.
    if (clean[i].empty() != adversarial[i].empty()) continue;
    if (!clean[i].empty()) cd += chamfer(clean[i], adversarial[i]);
    ++cd_frames;
  }
  ReportRow row;
  row.frames = clean.size();
  row.map_clean = average_precision(det_clean, gt, iou_threshold);
  row.map_adv = average_precision(det_adv, gt, iou_threshold);
  if (!(row.map_clean > 0.0)) throw UndefinedMetricError("clean mAP is 0; mAP ratio is undefined");
  row.map_ratio = 100.0 * row.map_adv / row.map_clean;
  row.mean_cd = cd_frames == 0 ? (clean.empty() ? 0.0 : std::numeric_limits<double>::quiet_NaN())
                                : cd / static_cast<double>(cd_frames);
  return row;
}

std::vector<double> default_sweep_values(AttackType type) {
  switch (type) {
    case AttackType::perturb: return {0.005, 0.01, 0.03, 0.05, 0.07, 0.10};
    case AttackType::detach: return {0.0005, 0.001, 0.003, 0.005, 0.01, 0.015};
    case AttackType::attach: return {0.05, 0.1, 0.3, 0.5, 0.7, 1.0};
    default: throw ParameterError(std::string("no sweep defined for '") + to_string(type) + "'");
  }
}

SweepAxis sweep_axis(AttackType type) {
  switch (type) {
    case AttackType::perturb: return {"epsilon_m", 100.0, "cm"};
    case AttackType::detach: return {"drop_ratio", 100.0, "%"};
    case AttackType::attach: return {"epsilon_m", 1.0, "m"};
    default: throw ParameterError(std::string("no sweep defined for '") + to_string(type) + "'");
  }
}

SweepOutcome run_sweep(const Detector& detector, std::span<const FrameRecord> clean, const SweepSpec& spec,
                       double iou_threshold, bool keep_clouds,
                       const std::function<void(std::size_t, std::size_t)>& progress) {
  const SweepAxis axis = sweep_axis(spec.type);
  const auto* surrogate = dynamic_cast<const SurrogateDetector*>(&detector);
  const DetectorModel model = surrogate != nullptr ? surrogate->model() : DetectorModel{};

  std::vector<PointCloud> clean_clouds;
  std::vector<FrameBoxes> gt;
  for (const FrameRecord& f : clean) {
    clean_clouds.push_back(f.point_cloud);
    gt.push_back(evaluable_boxes(model, f.gt_boxes));
  }

  SweepOutcome out;
  for (std::size_t v = 0; v < spec.values.size(); ++v) {
    json params = spec.base_params.is_object() ? spec.base_params : json::object();
    params[axis.key] = spec.values[v];
    const AttackSpec attack = parse_attack(to_string(spec.type), params, nullptr, 0, "/params");

    std::vector<PointCloud> adv;
    std::vector<std::vector<Vec3>> from;
    double loss = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      if (progress) progress(v, i);
      auto outcome = run_perception_attack(detector, attack, clean_clouds[i], clean[i].gt_boxes, clean[i].tick_index);
      if (!outcome.cloud) ++out.skipped_frames;
      if (keep_clouds && spec.type == AttackType::attach) from.push_back(std::move(outcome.injected_from));
      adv.push_back(outcome.cloud ? std::move(*outcome.cloud) : clean_clouds[i]);
      loss += detector.loss(adv.back(), clean[i].gt_boxes);
    }
    ReportRow row = evaluate_clouds(detector, clean_clouds, adv, gt, iou_threshold);
    row.attack_type = to_string(spec.type);
    row.parameter = spec.values[v] * axis.display_scale;
    row.parameter_unit = axis.unit;
    out.rows.push_back(row);
    out.mean_detection_loss.push_back(clean.empty() ? 0.0 : loss / static_cast<double>(clean.size()));
    if (keep_clouds) {
      out.adversarial.push_back(std::move(adv));
      if (spec.type == AttackType::attach) out.injected_from.push_back(std::move(from));
    }
  }
  return out;
}

}  // namespace advsim
