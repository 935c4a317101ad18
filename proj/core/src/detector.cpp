#include "advsim/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advsim/bev.hpp"
#include "advsim/errors.hpp"

namespace advsim {

namespace {

constexpr double kProbFloor = 1e-7;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::size_t cell_count(double lo, double hi, double cell) {
  const double n = (hi - lo) / cell;
  return n <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(n + 1e-9));
}

// Separable kernel window of one point over the anchor lattice.
struct KernelWindow {
  std::size_t ix0 = 0, ix1 = 0;  // half-open
  std::size_t iy0 = 0, iy1 = 0;
  std::vector<double> kx, ky;

  bool empty() const { return ix0 >= ix1 || iy0 >= iy1; }
};

class Lattice {
 public:
  explicit Lattice(const DetectorModel& m)
      : m_(m),
        nx_(m.anchors_x()),
        ny_(m.anchors_y()),
        reach_(m.cutoff_sigmas * m.bandwidth_m),
        inv_two_var_(1.0 / (2.0 * m.bandwidth_m * m.bandwidth_m)) {}

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double cx(std::size_t i) const { return m_.x_min + m_.cell_size_m * (static_cast<double>(i) + 0.5); }
  double cy(std::size_t j) const { return m_.y_min + m_.cell_size_m * (static_cast<double>(j) + 0.5); }

  void window(double px, double py, KernelWindow& w) const {
    axis(px, m_.x_min, nx_, w.ix0, w.ix1);
    axis(py, m_.y_min, ny_, w.iy0, w.iy1);
    w.kx.clear();
    w.ky.clear();
    if (w.empty()) return;
    for (std::size_t i = w.ix0; i < w.ix1; ++i) {
      const double d = cx(i) - px;
      w.kx.push_back(std::exp(-d * d * inv_two_var_));
    }
    for (std::size_t j = w.iy0; j < w.iy1; ++j) {
      const double d = cy(j) - py;
      w.ky.push_back(std::exp(-d * d * inv_two_var_));
    }
  }

 private:
  void axis(double p, double lo, std::size_t n, std::size_t& first, std::size_t& last) const {
    const double c = m_.cell_size_m;
    const double a = std::ceil((p - reach_ - lo) / c - 0.5);
    const double b = std::floor((p + reach_ - lo) / c - 0.5);
    const double nn = static_cast<double>(n);
    if (!(b >= 0.0) || !(a < nn) || a > b) {
      first = last = 0;
      return;
    }
    first = static_cast<std::size_t>(std::max(a, 0.0));
    last = static_cast<std::size_t>(std::min(b, nn - 1.0)) + 1;
  }

  const DetectorModel& m_;
  std::size_t nx_, ny_;
  double reach_;
  double inv_two_var_;
};

// Density plus kernel-weighted coordinate sums for centroids.
struct ForwardPass {
  std::vector<double> density;
  std::vector<double> occupancy;
  std::vector<Vec3> weighted_sum;
};

ForwardPass forward(const DetectorModel& model, const PointCloud& cloud, bool with_centroids) {
  const Lattice lat(model);
  const std::size_t ny = lat.ny();
  ForwardPass f;
  f.density.assign(model.anchor_count(), 0.0);
  if (with_centroids) f.weighted_sum.assign(model.anchor_count(), Vec3{});
  KernelWindow w;
  for (const Vec3& p : cloud.points) {
    lat.window(p.x, p.y, w);
    if (w.empty()) continue;
    for (std::size_t i = w.ix0; i < w.ix1; ++i) {
      const double kx = w.kx[i - w.ix0];
      const std::size_t row = i * ny;
      for (std::size_t j = w.iy0; j < w.iy1; ++j) {
        const double k = kx * w.ky[j - w.iy0];
        f.density[row + j] += k;
        if (with_centroids) f.weighted_sum[row + j] += k * p;
      }
    }
  }
  f.occupancy.resize(f.density.size());
  for (std::size_t a = 0; a < f.density.size(); ++a) {
    f.occupancy[a] = sigmoid(model.weight * f.density[a] + model.bias);
  }
  return f;
}

double bce(const std::vector<double>& occupancy, const std::vector<unsigned char>& targets) {
  double sum = 0.0;
  for (std::size_t a = 0; a < occupancy.size(); ++a) {
    const double o = std::clamp(occupancy[a], kProbFloor, 1.0 - kProbFloor);
    sum += targets[a] ? std::log(o) : std::log(1.0 - o);
  }
  return occupancy.empty() ? 0.0 : -sum / static_cast<double>(occupancy.size());
}

// Per-anchor coefficient dL/do * do/dd / sigma^2; the point gradient is
// sum_a coeff_a * k_ia * (mu_a - p_i).
std::vector<double> anchor_coefficients(const DetectorModel& model, const std::vector<double>& occupancy,
                                        const std::vector<unsigned char>& targets) {
  const double inv_a = 1.0 / static_cast<double>(occupancy.size());
  const double inv_var = 1.0 / (model.bandwidth_m * model.bandwidth_m);
  std::vector<double> coeff(occupancy.size(), 0.0);
  for (std::size_t a = 0; a < occupancy.size(); ++a) {
    const double o = occupancy[a];
    // The clamp is flat outside [floor, 1 - floor].
    if (o < kProbFloor || o > 1.0 - kProbFloor) continue;
    const double dl_do = targets[a] ? -inv_a / o : inv_a / (1.0 - o);
    coeff[a] = dl_do * o * (1.0 - o) * model.weight * inv_var;
  }
  return coeff;
}

void backward(const DetectorModel& model, const PointCloud& cloud, const std::vector<double>& coeff,
              std::size_t first, std::vector<Vec3>& grad) {
  const Lattice lat(model);
  const std::size_t ny = lat.ny();
  grad.assign(cloud.size() - std::min(first, cloud.size()), Vec3{});
  KernelWindow w;
  for (std::size_t n = first; n < cloud.size(); ++n) {
    const Vec3& p = cloud[n];
    lat.window(p.x, p.y, w);
    if (w.empty()) continue;
    double gx = 0.0;
    double gy = 0.0;
    for (std::size_t i = w.ix0; i < w.ix1; ++i) {
      const double kx = w.kx[i - w.ix0];
      const double dx = lat.cx(i) - p.x;
      const std::size_t row = i * ny;
      for (std::size_t j = w.iy0; j < w.iy1; ++j) {
        const double c = coeff[row + j];
        if (c == 0.0) continue;
        const double ck = c * kx * w.ky[j - w.iy0];
        gx += ck * dx;
        gy += ck * (lat.cy(j) - p.y);
      }
    }
    grad[n - first] = {gx, gy, 0.0};
  }
}

}  // namespace

std::size_t DetectorModel::anchors_x() const { return cell_count(x_min, x_max, cell_size_m); }
std::size_t DetectorModel::anchors_y() const { return cell_count(y_min, y_max, cell_size_m); }

Vec2 DetectorModel::anchor_center(std::size_t index) const {
  const std::size_t ny = anchors_y();
  const std::size_t i = index / ny;
  const std::size_t j = index % ny;
  return {x_min + cell_size_m * (static_cast<double>(i) + 0.5),
          y_min + cell_size_m * (static_cast<double>(j) + 0.5)};
}

void DetectorModel::validate() const {
  if (!(bandwidth_m > 0.0)) throw ParameterError("detector bandwidth must be > 0");
  if (!(cell_size_m > 0.0)) throw ParameterError("detector cell size must be > 0");
  if (!(score_threshold > 0.0 && score_threshold < 1.0)) {
    throw ParameterError("detector score threshold must lie in (0, 1)");
  }
  if (!(x_max > x_min && y_max > y_min)) throw ParameterError("detector range rectangle is empty");
  if (anchor_count() == 0) throw ParameterError("detector range holds no anchor cell");
  if (!(box_template.length > 0 && box_template.width > 0 && box_template.height > 0)) {
    throw ParameterError("detector box template dims must be > 0");
  }
  if (!(cutoff_sigmas > 0.0)) throw ParameterError("detector cutoff must be > 0");
}

AnchorField anchor_field(const DetectorModel& model, const PointCloud& cloud) {
  auto f = forward(model, cloud, false);
  return {std::move(f.density), std::move(f.occupancy)};
}

std::vector<unsigned char> anchor_targets(const DetectorModel& model, std::span<const BBox3D> gt) {
  std::vector<unsigned char> t(model.anchor_count(), 0);
  if (gt.empty()) return t;
  for (std::size_t a = 0; a < t.size(); ++a) {
    const Vec2 mu = model.anchor_center(a);
    for (const BBox3D& b : gt) {
      if (bev_contains(b, mu)) {
        t[a] = 1;
        break;
      }
    }
  }
  return t;
}

std::vector<Detection> detect(const DetectorModel& model, const PointCloud& cloud) {
  const ForwardPass f = forward(model, cloud, true);
  std::vector<Detection> candidates;
  for (std::size_t a = 0; a < f.occupancy.size(); ++a) {
    if (!(f.occupancy[a] > model.score_threshold) || !(f.density[a] > 0.0)) continue;
    const Vec3 centroid = (1.0 / f.density[a]) * f.weighted_sum[a];
    Detection d;
    d.box.center = {centroid.x, centroid.y, centroid.z + 0.5 * model.box_template.height};
    d.box.dims = model.box_template;
    d.box.yaw = 0.0;
    d.score = f.occupancy[a];
    d.anchor = a;
    candidates.push_back(d);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Detection& l, const Detection& r) {
    if (l.score != r.score) return l.score > r.score;
    return l.anchor < r.anchor;
  });
  std::vector<Detection> kept;
  for (const Detection& c : candidates) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return bev_iou(k.box, c.box) > model.nms_iou;
    });
    if (!suppressed) kept.push_back(c);
  }
  return kept;
}

double detection_loss(const DetectorModel& model, const PointCloud& cloud, std::span<const BBox3D> gt) {
  const auto f = forward(model, cloud, false);
  return bce(f.occupancy, anchor_targets(model, gt));
}

std::vector<Vec3> loss_gradient(const DetectorModel& model, const PointCloud& cloud,
                                std::span<const BBox3D> gt) {
  std::vector<Vec3> grad;
  SurrogateDetector(model).loss_and_gradient(cloud, gt, 0, grad);
  return grad;
}

SaliencyMap saliency(const DetectorModel& model, const PointCloud& cloud, std::span<const BBox3D> gt) {
  return saliency(SurrogateDetector(model), cloud, gt);
}

SaliencyMap saliency(const Detector& detector, const PointCloud& cloud, std::span<const BBox3D> gt) {
  const auto grad = detector.gradient(cloud, gt);
  SaliencyMap out(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) out[i] = {i, norm(grad[i])};
  return out;
}

double Detector::loss_and_gradient(const PointCloud& cloud, std::span<const BBox3D> gt, std::size_t first,
                                   std::vector<Vec3>& grad_out) const {
  auto full = gradient(cloud, gt);
  grad_out.assign(full.begin() + static_cast<std::ptrdiff_t>(std::min(first, full.size())), full.end());
  return loss(cloud, gt);
}

SurrogateDetector::SurrogateDetector(DetectorModel model) : model_(std::move(model)) { model_.validate(); }

std::vector<Detection> SurrogateDetector::detect(const PointCloud& cloud) const {
  return advsim::detect(model_, cloud);
}

double SurrogateDetector::loss(const PointCloud& cloud, std::span<const BBox3D> gt) const {
  return detection_loss(model_, cloud, gt);
}

std::vector<Vec3> SurrogateDetector::gradient(const PointCloud& cloud, std::span<const BBox3D> gt) const {
  std::vector<Vec3> grad;
  loss_and_gradient(cloud, gt, 0, grad);
  return grad;
}

double SurrogateDetector::loss_and_gradient(const PointCloud& cloud, std::span<const BBox3D> gt,
                                            std::size_t first, std::vector<Vec3>& grad_out) const {
  const auto f = forward(model_, cloud, false);
  const auto targets = anchor_targets(model_, gt);
  const auto coeff = anchor_coefficients(model_, f.occupancy, targets);
  backward(model_, cloud, coeff, first, grad_out);
  return bce(f.occupancy, targets);
}

}  // namespace advsim
