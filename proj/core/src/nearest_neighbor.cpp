#include "advsim/nearest_neighbor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace advsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void consider(const Vec3& p, std::size_t index, const Vec3& q, Neighbor& best) {
  const double d = squared_distance(p, q);
  if (d < best.squared_distance || (d == best.squared_distance && index < best.index)) {
    best = {index, d};
  }
}

}  // namespace

Neighbor brute_force_nearest(std::span<const Vec3> points, const Vec3& q) {
  Neighbor best{0, kInf};
  for (std::size_t i = 0; i < points.size(); ++i) consider(points[i], i, q, best);
  return best;
}

NearestNeighborIndex::NearestNeighborIndex(std::span<const Vec3> points)
    : points_(points.begin(), points.end()) {
  if (points_.empty()) {
    cell_start_.assign(2, 0);
    return;
  }
  Vec3 lo = points_.front();
  Vec3 hi = points_.front();
  for (const Vec3& p : points_) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  origin_ = lo;
  double max_extent = 0.0;
  for (int a = 0; a < 3; ++a) max_extent = std::max(max_extent, hi[a] - lo[a]);
  if (max_extent <= 0.0) max_extent = 1.0;

  const double n = static_cast<double>(points_.size());
  double volume = 1.0;
  for (int a = 0; a < 3; ++a) volume *= std::max(hi[a] - lo[a], max_extent * 1e-3);
  cell_ = std::cbrt(2.0 * volume / n);
  const auto total_cells = [&] {
    double c = 1.0;
    for (int a = 0; a < 3; ++a) c *= std::floor((hi[a] - lo[a]) / cell_) + 1.0;
    return c;
  };
  while (total_cells() > 4.0 * n + 8.0) cell_ *= 1.5;

  for (int a = 0; a < 3; ++a) {
    dims_[a] = static_cast<std::size_t>(std::floor((hi[a] - lo[a]) / cell_)) + 1;
  }
  const std::size_t cells = dims_[0] * dims_[1] * dims_[2];
  std::vector<std::size_t> cell_id(points_.size());
  cell_start_.assign(cells + 1, 0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const std::size_t id =
        (cell_of(points_[i], 0) * dims_[1] + cell_of(points_[i], 1)) * dims_[2] + cell_of(points_[i], 2);
    cell_id[i] = id;
    ++cell_start_[id + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_points_.resize(points_.size());
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) cell_points_[fill[cell_id[i]]++] = i;
}

std::size_t NearestNeighborIndex::cell_of(const Vec3& p, int axis) const {
  const double f = std::floor((p[axis] - origin_[axis]) / cell_);
  if (!(f > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(f), dims_[axis] - 1);
}

void NearestNeighborIndex::scan_cell(std::size_t cx, std::size_t cy, std::size_t cz, const Vec3& q,
                                     Neighbor& best) const {
  const std::size_t id = (cx * dims_[1] + cy) * dims_[2] + cz;
  for (std::size_t k = cell_start_[id]; k < cell_start_[id + 1]; ++k) {
    const std::size_t i = cell_points_[k];
    consider(points_[i], i, q, best);
  }
}

Neighbor NearestNeighborIndex::nearest(const Vec3& q) const {
  Neighbor best{0, kInf};
  if (points_.empty()) return best;
  const long c[3] = {static_cast<long>(cell_of(q, 0)), static_cast<long>(cell_of(q, 1)),
                     static_cast<long>(cell_of(q, 2))};
  const long d[3] = {static_cast<long>(dims_[0]), static_cast<long>(dims_[1]), static_cast<long>(dims_[2])};

  for (long r = 0;; ++r) {
    for (long x = std::max(0L, c[0] - r); x <= std::min(d[0] - 1, c[0] + r); ++x) {
      const bool x_edge = std::abs(x - c[0]) == r;
      for (long y = std::max(0L, c[1] - r); y <= std::min(d[1] - 1, c[1] + r); ++y) {
        const bool xy_edge = x_edge || std::abs(y - c[1]) == r;
        if (xy_edge) {
          for (long z = std::max(0L, c[2] - r); z <= std::min(d[2] - 1, c[2] + r); ++z) {
            scan_cell(static_cast<std::size_t>(x), static_cast<std::size_t>(y), static_cast<std::size_t>(z), q,
                      best);
          }
        } else {
          if (c[2] - r >= 0) {
            scan_cell(static_cast<std::size_t>(x), static_cast<std::size_t>(y), static_cast<std::size_t>(c[2] - r),
                      q, best);
          }
          if (r > 0 && c[2] + r < d[2]) {
            scan_cell(static_cast<std::size_t>(x), static_cast<std::size_t>(y), static_cast<std::size_t>(c[2] + r),
                      q, best);
          }
        }
      }
    }

    // Distance from q to anything outside the cube of rings <= r.
    double bound = kInf;
    bool remaining = false;
    for (int a = 0; a < 3; ++a) {
      if (c[a] - r > 0) {
        remaining = true;
        bound = std::min(bound, q[a] - (origin_[a] + static_cast<double>(c[a] - r) * cell_));
      }
      if (c[a] + r < d[a] - 1) {
        remaining = true;
        bound = std::min(bound, (origin_[a] + static_cast<double>(c[a] + r + 1) * cell_) - q[a]);
      }
    }
    if (!remaining) break;
    if (bound > 0.0 && best.squared_distance < bound * bound * (1.0 - 1e-12)) break;
  }
  return best;
}

}  // namespace advsim
