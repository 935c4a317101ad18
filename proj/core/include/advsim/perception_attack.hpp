#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "advsim/detector.hpp"
#include "advsim/types.hpp"

namespace advsim {

/// How the PGD step direction is normalized.
enum class GradientNorm {
  global,     // one l2 norm over the whole N x 3 gradient
  per_point,  // each point's row normalized on its own
};

struct PerturbParams {
  double epsilon_m = 0.05;
  std::size_t steps = 40;
  std::optional<double> alpha_m;  // defaults to epsilon / 30
  double lambda = 0.1;
  std::uint64_t seed = 0;
  GradientNorm normalization = GradientNorm::global;

  double step_size() const { return alpha_m.value_or(epsilon_m / 30.0); }
  void validate() const;
};

struct DetachParams {
  double drop_ratio = 0.01;
  std::size_t iterations = 10;
  std::uint64_t seed = 0;  // unused: detachment is deterministic

  void validate() const;
};

struct AttachParams {
  std::size_t k = 300;
  double epsilon_m = 0.5;
  std::size_t steps = 40;
  std::optional<double> alpha_m;
  double lambda_chamfer = 1.0;
  std::uint64_t seed = 0;
  GradientNorm normalization = GradientNorm::global;

  double step_size() const { return alpha_m.value_or(epsilon_m / 30.0); }
  void validate() const;
};

/// Per-point displacement from the clean cloud.
struct Perturbation {
  std::vector<Vec3> deltas;
};

struct AttackStep {
  std::size_t step = 0;
  double objective = 0.0;       // value minimized at this step
  double detection_loss = 0.0;  // L_det of the cloud entering this step
  bool stalled = false;         // gradient norm below 1e-12, update skipped
};

/// Projects a displacement onto the closed l2 ball of radius epsilon. The
/// result never has a norm above epsilon, even after rounding.
Vec3 clip_displacement(const Vec3& delta, double epsilon);

/// Point-wise clip of an adversarial cloud into the epsilon-ball around the
/// matching original point.
PointCloud clip_to_ball(const PointCloud& original, const PointCloud& adversarial, double epsilon);

struct PerturbResult {
  PointCloud adversarial;
  Perturbation perturbation;
  std::vector<AttackStep> trace;  // steps entries plus a final evaluation
};

/// PGD on L = -L_det(P + delta) + lambda * sum |delta_i|^2 with point-wise
/// l2 clipping. Requires a non-empty cloud.
PerturbResult perturb_attack(const Detector& detector, const PointCloud& cloud, std::span<const BBox3D> gt,
                             const PerturbParams& params);

/// floor(N * ratio), tolerant to the ratio's decimal representation.
std::size_t detach_budget(std::size_t n, double drop_ratio);

struct DetachResult {
  PointCloud adversarial;
  std::vector<std::size_t> removed;  // original indices, in removal order
};

/// Greedy saliency-driven point removal. Throws ParameterError when the
/// budget floors to zero.
DetachResult detach_attack(const Detector& detector, const PointCloud& cloud, std::span<const BBox3D> gt,
                           const DetachParams& params);

struct AttachResult {
  PointCloud adversarial;                // original N points followed by K injected
  std::vector<std::size_t> injected;     // indices N .. N+K-1
  std::vector<Vec3> initial_positions;   // salient points the injected ones started from
  std::vector<std::size_t> source_indices;
  std::vector<AttackStep> trace;
};

/// Initialize-and-shift point injection: copies the K most salient points,
/// then moves only the copies to minimize -L_det + lambda_c * chamfer.
AttachResult attach_attack(const Detector& detector, const PointCloud& cloud, std::span<const BBox3D> gt,
                           const AttachParams& params);

/// Indices of the k largest scores, highest first, ties by lower index.
std::vector<std::size_t> top_k_salient(const SaliencyMap& saliency, std::size_t k);

}  // namespace advsim
