#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "advsim/geometry.hpp"

namespace advsim {

struct Neighbor {
  std::size_t index = 0;
  double squared_distance = 0.0;
};

/// Exact nearest-neighbor search over a uniform voxel grid.
///
/// Returns the same squared distance a brute-force scan computes (identical
/// arithmetic), and on ties the lowest point index, so results are bitwise
/// interchangeable with the O(N) scan.
class NearestNeighborIndex {
 public:
  explicit NearestNeighborIndex(std::span<const Vec3> points);

  /// Requires a non-empty point set.
  Neighbor nearest(const Vec3& q) const;

  std::size_t size() const noexcept { return points_.size(); }

 private:
  std::size_t cell_of(const Vec3& p, int axis) const;
  void scan_cell(std::size_t cx, std::size_t cy, std::size_t cz, const Vec3& q, Neighbor& best) const;

  std::vector<Vec3> points_;
  Vec3 origin_;
  double cell_ = 1.0;
  std::size_t dims_[3] = {1, 1, 1};
  std::vector<std::size_t> cell_start_;  // CSR offsets, size cells + 1
  std::vector<std::size_t> cell_points_;
};

/// Reference O(N) scan with the same tie rule.
Neighbor brute_force_nearest(std::span<const Vec3> points, const Vec3& q);

}  // namespace advsim
