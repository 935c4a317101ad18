#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advsim/bev.hpp"
#include "advsim/detector.hpp"
#include "advsim/types.hpp"

namespace advsim {

/// Symmetric mean of squared nearest-neighbor distances:
///   (1/|P|) sum_p min_q |p - q|^2 + (1/|Q|) sum_q min_p |q - p|^2
/// Throws UndefinedMetricError if either cloud is empty.
double chamfer(const PointCloud& p, const PointCloud& q);

using FrameDetections = std::vector<Detection>;
using FrameBoxes = std::vector<BBox3D>;

/// Single-class AP with greedy matching and all-point interpolation.
/// Throws UndefinedMetricError when the dataset has no ground truth.
double average_precision(std::span<const FrameDetections> detections, std::span<const FrameBoxes> gts,
                         double iou_threshold = 0.5);

/// 100 * mAP_adv / mAP_clean. Throws UndefinedMetricError when mAP_clean is 0.
double map_ratio(std::span<const FrameDetections> clean, std::span<const FrameDetections> adversarial,
                 std::span<const FrameBoxes> gts, double iou_threshold = 0.5);

struct ReportRow {
  std::string attack_type;
  double parameter = 0.0;
  std::string parameter_unit;
  double map_clean = 0.0;
  double map_adv = 0.0;
  double map_ratio = 0.0;  // percent
  double mean_cd = 0.0;  // NaN when no frame pair has a defined CD
  std::size_t frames = 0;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::vector<std::string> datasets;
  nlohmann::ordered_json detector;
  double iou_threshold = 0.5;
};

/// Orders rows by attack type (perturb, detach, attach, then others by name)
/// and parameter. Requires at least one row.
EvalReport build_report(std::vector<ReportRow> rows, std::vector<std::string> datasets,
                        nlohmann::ordered_json detector, double iou_threshold);

/// Aligned plain-text table: Attack Type, Parameter, mAP Ratio (%), CD.
std::string render_table(const EvalReport& report);

nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace advsim
