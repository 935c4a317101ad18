#include "advsim/perception_attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "advsim/errors.hpp"
#include "advsim/nearest_neighbor.hpp"
#include "advsim/random.hpp"

namespace advsim {

namespace {

constexpr double kStallNorm = 1e-12;

double frobenius(const std::vector<Vec3>& g) {
  double s = 0.0;
  for (const Vec3& v : g) s += squared_norm(v);
  return std::sqrt(s);
}

// Moves `points[offset + i]` by -alpha * normalized g_i. Returns false on a
// stall (nothing moved).
bool descend(std::vector<Vec3>& points, std::size_t offset, const std::vector<Vec3>& g, double alpha,
             GradientNorm mode) {
  if (mode == GradientNorm::global) {
    const double gn = frobenius(g);
    if (!(gn >= kStallNorm)) return false;
    const double scale = alpha / gn;
    for (std::size_t i = 0; i < g.size(); ++i) points[offset + i] -= scale * g[i];
    return true;
  }
  bool moved = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double gn = norm(g[i]);
    if (!(gn >= kStallNorm)) continue;
    points[offset + i] -= (alpha / gn) * g[i];
    moved = true;
  }
  return moved;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(what) + " must be > 0");
}

}  // namespace

void PerturbParams::validate() const {
  require_positive(epsilon_m, "perturb epsilon");
  if (steps < 1) throw ParameterError("perturb steps must be >= 1");
  require_positive(step_size(), "perturb alpha");
  if (!(lambda >= 0.0)) throw ParameterError("perturb lambda must be >= 0");
}

void DetachParams::validate() const {
  if (!(drop_ratio > 0.0 && drop_ratio < 1.0)) throw ParameterError("detach drop_ratio must lie in (0, 1)");
  if (iterations < 1) throw ParameterError("detach iterations must be >= 1");
}

void AttachParams::validate() const {
  if (k < 1) throw ParameterError("attach k must be >= 1");
  require_positive(epsilon_m, "attach epsilon");
  if (steps < 1) throw ParameterError("attach steps must be >= 1");
  require_positive(step_size(), "attach alpha");
  if (!(lambda_chamfer >= 0.0)) throw ParameterError("attach lambda_chamfer must be >= 0");
}

Vec3 clip_displacement(const Vec3& delta, double epsilon) {
  const double n = norm(delta);
  if (n <= epsilon) return delta;
  double scale = epsilon / n;
  Vec3 out = scale * delta;
  while (norm(out) > epsilon) {
    scale = std::nextafter(scale, 0.0);
    out = scale * delta;
  }
  return out;
}

PointCloud clip_to_ball(const PointCloud& original, const PointCloud& adversarial, double epsilon) {
  PointCloud out = adversarial;
  for (std::size_t i = 0; i < original.size(); ++i) {
    out[i] = original[i] + clip_displacement(adversarial[i] - original[i], epsilon);
  }
  return out;
}

PerturbResult perturb_attack(const Detector& detector, const PointCloud& cloud, std::span<const BBox3D> gt,
                             const PerturbParams& params) {
  params.validate();
  if (cloud.empty()) throw ParameterError("perturb attack needs a non-empty cloud");
  const double eps = params.epsilon_m;
  const double alpha = params.step_size();

  Rng rng(params.seed);
  PointCloud adv = cloud;
  for (Vec3& p : adv.points) {
    const double dx = rng.uniform(-eps, eps);
    const double dy = rng.uniform(-eps, eps);
    const double dz = rng.uniform(-eps, eps);
    p += Vec3{dx, dy, dz};
  }
  adv = clip_to_ball(cloud, adv, eps);

  PerturbResult result;
  std::vector<Vec3> grad;
  const auto objective = [&](double det_loss) {
    double per = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) per += squared_distance(adv[i], cloud[i]);
    return -det_loss + params.lambda * per;
  };

  for (std::size_t t = 0; t < params.steps; ++t) {
    const double det_loss = detector.loss_and_gradient(adv, gt, 0, grad);
    // grad L = -grad L_det + 2 lambda delta
    for (std::size_t i = 0; i < grad.size(); ++i) {
      grad[i] = -grad[i] + (2.0 * params.lambda) * (adv[i] - cloud[i]);
    }
    AttackStep rec{t, objective(det_loss), det_loss, false};
    rec.stalled = !descend(adv.points, 0, grad, alpha, params.normalization);
    result.trace.push_back(rec);
    if (!rec.stalled) adv = clip_to_ball(cloud, adv, eps);
  }
  const double final_loss = detector.loss(adv, gt);
  result.trace.push_back({params.steps, objective(final_loss), final_loss, false});

  result.perturbation.deltas.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) result.perturbation.deltas[i] = adv[i] - cloud[i];
  result.adversarial = std::move(adv);
  return result;
}

std::size_t detach_budget(std::size_t n, double drop_ratio) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * drop_ratio + 1e-9));
}

std::vector<std::size_t> top_k_salient(const SaliencyMap& saliency, std::size_t k) {
  std::vector<std::size_t> order(saliency.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  k = std::min(k, order.size());
  const auto cmp = [&](std::size_t a, std::size_t b) {
    if (saliency[a].score != saliency[b].score) return saliency[a].score > saliency[b].score;
    return saliency[a].index < saliency[b].index;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), cmp);
  order.resize(k);
  return order;
}

DetachResult detach_attack(const Detector& detector, const PointCloud& cloud, std::span<const BBox3D> gt,
                           const DetachParams& params) {
  params.validate();
  const std::size_t budget = detach_budget(cloud.size(), params.drop_ratio);
  if (budget == 0) {
    throw ParameterError("detach budget floor(" + std::to_string(cloud.size()) + " * " +
                         std::to_string(params.drop_ratio) + ") is 0");
  }

  PointCloud current = cloud;
  std::vector<std::size_t> original_index(cloud.size());
  std::iota(original_index.begin(), original_index.end(), std::size_t{0});
  DetachResult result;

  const std::size_t base = budget / params.iterations;
  const std::size_t extra = budget % params.iterations;
  for (std::size_t it = 0; it < params.iterations; ++it) {
    const std::size_t chunk = base + (it < extra ? 1 : 0);
    if (chunk == 0) continue;
    SaliencyMap s = saliency(detector, current, gt);
    // Ties go to the lower original index; current order preserves it.
    for (std::size_t i = 0; i < s.size(); ++i) s[i].index = original_index[i];
    const auto drop = top_k_salient(s, chunk);

    std::vector<unsigned char> gone(current.size(), 0);
    for (std::size_t local : drop) {
      gone[local] = 1;
      result.removed.push_back(original_index[local]);
    }
    PointCloud next;
    std::vector<std::size_t> next_index;
    next.points.reserve(current.size() - drop.size());
    next_index.reserve(current.size() - drop.size());
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (gone[i]) continue;
      next.points.push_back(current[i]);
      next_index.push_back(original_index[i]);
    }
    current = std::move(next);
    original_index = std::move(next_index);
  }
  result.adversarial = std::move(current);
  return result;
}

AttachResult attach_attack(const Detector& detector, const PointCloud& cloud, std::span<const BBox3D> gt,
                           const AttachParams& params) {
  params.validate();
  const std::size_t n = cloud.size();
  const std::size_t k = params.k;
  if (k > n) {
    throw ParameterError("attach k = " + std::to_string(k) + " exceeds cloud size " + std::to_string(n));
  }
  const double eps = params.epsilon_m;
  const double alpha = params.step_size();

  AttachResult result;
  result.source_indices = top_k_salient(saliency(detector, cloud, gt), k);
  PointCloud adv = cloud;
  adv.points.reserve(n + k);
  for (std::size_t idx : result.source_indices) {
    result.initial_positions.push_back(cloud[idx]);
    adv.points.push_back(cloud[idx]);
  }

  const NearestNeighborIndex original_index(cloud.points);
  const double inv_total = 1.0 / static_cast<double>(n + k);
  std::vector<Vec3> grad;
  std::vector<Neighbor> nn(k);

  // Only the second chamfer sum can be nonzero: every original point is its
  // own neighbor in P u Z, and so is every original point in the reverse sum.
  const auto chamfer_term = [&] {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      nn[j] = original_index.nearest(adv[n + j]);
      sum += nn[j].squared_distance;
    }
    return sum * inv_total;
  };

  for (std::size_t t = 0; t < params.steps; ++t) {
    const double det_loss = detector.loss_and_gradient(adv, gt, n, grad);
    const double cd = chamfer_term();
    for (std::size_t j = 0; j < k; ++j) {
      const Vec3 pull = (2.0 * inv_total) * (adv[n + j] - cloud[nn[j].index]);
      grad[j] = -grad[j] + params.lambda_chamfer * pull;
    }
    AttackStep rec{t, -det_loss + params.lambda_chamfer * cd, det_loss, false};
    rec.stalled = !descend(adv.points, n, grad, alpha, params.normalization);
    result.trace.push_back(rec);
    if (!rec.stalled) {
      for (std::size_t j = 0; j < k; ++j) {
        const Vec3& init = result.initial_positions[j];
        adv[n + j] = init + clip_displacement(adv[n + j] - init, eps);
      }
    }
  }
  const double final_loss = detector.loss(adv, gt);
  result.trace.push_back({params.steps, -final_loss + params.lambda_chamfer * chamfer_term(), final_loss, false});

  result.injected.resize(k);
  std::iota(result.injected.begin(), result.injected.end(), n);
  result.adversarial = std::move(adv);
  return result;
}

}  // namespace advsim
