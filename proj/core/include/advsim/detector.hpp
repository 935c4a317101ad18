#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "advsim/types.hpp"

namespace advsim {

/// Parameters of the Gaussian-density anchor classifier used as the
/// differentiable 3D detector.
///
/// Each anchor a sits at the center of a BEV grid cell. Its density is
///   d_a = sum_i exp(-|p_i - mu_a|^2 / (2 sigma^2))      (x, y only)
/// and its occupancy o_a = sigmoid(weight * d_a + bias).
struct DetectorModel {
  double cell_size_m = 2.0;
  double bandwidth_m = 1.0;
  double weight = 1.0;
  double bias = -4.0;
  double score_threshold = 0.5;
  Dims box_template{4.5, 1.8, 1.6};
  double x_min = 0.0;
  double x_max = 70.0;
  double y_min = -40.0;
  double y_max = 40.0;
  double nms_iou = 0.5;

  /// Kernel terms beyond this many bandwidths are skipped. At 9 sigma a term
  /// is below 3e-18 of a unit contribution.
  double cutoff_sigmas = 9.0;

  std::size_t anchors_x() const;
  std::size_t anchors_y() const;
  std::size_t anchor_count() const { return anchors_x() * anchors_y(); }
  /// Anchor index = ix * anchors_y() + iy.
  Vec2 anchor_center(std::size_t index) const;

  /// Throws ParameterError when an invariant is broken.
  void validate() const;

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;
};

struct Detection {
  BBox3D box;
  double score = 0.0;
  std::size_t anchor = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct SaliencyEntry {
  std::size_t index = 0;
  double score = 0.0;
};

using SaliencyMap = std::vector<SaliencyEntry>;

/// Per-anchor forward pass results.
struct AnchorField {
  std::vector<double> density;
  std::vector<double> occupancy;
};

AnchorField anchor_field(const DetectorModel& model, const PointCloud& cloud);

/// BCE target per anchor: 1 when the anchor center is inside any GT footprint.
std::vector<unsigned char> anchor_targets(const DetectorModel& model, std::span<const BBox3D> gt);

std::vector<Detection> detect(const DetectorModel& model, const PointCloud& cloud);

double detection_loss(const DetectorModel& model, const PointCloud& cloud, std::span<const BBox3D> gt);

/// Analytic d(detection_loss)/d(p_i) for every point; z components are zero.
std::vector<Vec3> loss_gradient(const DetectorModel& model, const PointCloud& cloud,
                                std::span<const BBox3D> gt);

SaliencyMap saliency(const DetectorModel& model, const PointCloud& cloud, std::span<const BBox3D> gt);

/// Interface consumed by the perception attacks and the evaluator, so the
/// surrogate can be swapped for another differentiable model.
class Detector {
 public:
  virtual ~Detector() = default;

  virtual std::vector<Detection> detect(const PointCloud& cloud) const = 0;
  virtual double loss(const PointCloud& cloud, std::span<const BBox3D> gt) const = 0;
  virtual std::vector<Vec3> gradient(const PointCloud& cloud, std::span<const BBox3D> gt) const = 0;

  /// Loss and the gradient rows [first, N) in one pass. Attacks that only move
  /// a suffix of the cloud call this; the default computes everything.
  virtual double loss_and_gradient(const PointCloud& cloud, std::span<const BBox3D> gt,
                                   std::size_t first, std::vector<Vec3>& grad_out) const;
};

class SurrogateDetector final : public Detector {
 public:
  explicit SurrogateDetector(DetectorModel model = {});

  const DetectorModel& model() const noexcept { return model_; }

  std::vector<Detection> detect(const PointCloud& cloud) const override;
  double loss(const PointCloud& cloud, std::span<const BBox3D> gt) const override;
  std::vector<Vec3> gradient(const PointCloud& cloud, std::span<const BBox3D> gt) const override;
  double loss_and_gradient(const PointCloud& cloud, std::span<const BBox3D> gt, std::size_t first,
                           std::vector<Vec3>& grad_out) const override;

 private:
  DetectorModel model_;
};

/// Saliency through the generic interface: s_i = |grad_i|.
SaliencyMap saliency(const Detector& detector, const PointCloud& cloud, std::span<const BBox3D> gt);

}  // namespace advsim
