#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advsim/detector.hpp"
#include "advsim/metrics.hpp"
#include "advsim/scenario.hpp"

namespace advsim {

struct Dataset {
  std::filesystem::path dir;
  std::vector<FrameRecord> frames;  // ascending tick
  nlohmann::json metadata;          // null when the directory has none
};

Dataset load_dataset(const std::filesystem::path& dir);

/// Detector recorded in a dataset's metadata, or the default model.
DetectorModel dataset_detector(const nlohmann::json& metadata);
/// IoU threshold recorded in metadata, or 0.5.
double dataset_iou_threshold(const nlohmann::json& metadata);

/// Throws Error naming the ticks present in one set only.
void require_same_ticks(const Dataset& clean, const Dataset& adversarial);

/// Ground truth the detector can be scored on: boxes whose center lies in
/// its BEV range rectangle.
FrameBoxes evaluable_boxes(const DetectorModel& model, std::span<const BBox3D> boxes);

/// One report row from paired clouds. mAP ratio is 0 when the adversarial
/// side has no detections at all. CD is averaged over the frames where it is
/// defined (a pair with exactly one empty cloud has none).
ReportRow evaluate_clouds(const Detector& detector, std::span<const PointCloud> clean,
                          std::span<const PointCloud> adversarial, std::span<const FrameBoxes> gt,
                          double iou_threshold);

struct SweepSpec {
  AttackType type = AttackType::perturb;
  std::vector<double> values;  // epsilon_m, drop_ratio or epsilon_m
  nlohmann::json base_params = nlohmann::json::object();
};

/// Parameter values swept by default for each perception attack.
std::vector<double> default_sweep_values(AttackType type);

/// Name of the swept key and the display scale/unit used in reports.
struct SweepAxis {
  std::string key;
  double display_scale = 1.0;
  std::string unit;
};
SweepAxis sweep_axis(AttackType type);

struct SweepOutcome {
  std::vector<ReportRow> rows;
  std::vector<std::vector<PointCloud>> adversarial;  // per value, per frame (kept on request)
  std::vector<std::vector<std::vector<Vec3>>> injected_from;  // attach only, kept with the clouds
  std::vector<double> mean_detection_loss;           // per value
  std::size_t skipped_frames = 0;
};

/// Attacks every frame of `clean` once per value and scores it.
SweepOutcome run_sweep(const Detector& detector, std::span<const FrameRecord> clean, const SweepSpec& spec,
                       double iou_threshold, bool keep_clouds = false,
                       const std::function<void(std::size_t value_index, std::size_t frame)>& progress = {});

}  // namespace advsim
