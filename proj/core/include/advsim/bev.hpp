#pragma once

#include <array>
#include <vector>

#include "advsim/geometry.hpp"
#include "advsim/types.hpp"

namespace advsim {

/// Counter-clockwise corners of a box's bird's-eye-view footprint.
std::array<Vec2, 4> bev_corners(const BBox3D& box);

/// True when p lies inside (or on the edge of) the box's BEV rectangle.
bool bev_contains(const BBox3D& box, Vec2 p);

/// Signed shoelace area; positive for counter-clockwise polygons.
double polygon_area(const std::vector<Vec2>& poly);

/// Intersection of two convex polygons given counter-clockwise
/// (Sutherland-Hodgman clipping).
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip);

/// Intersection-over-union of the two boxes' BEV rotated rectangles, in [0, 1].
double bev_iou(const BBox3D& a, const BBox3D& b);

}  // namespace advsim
