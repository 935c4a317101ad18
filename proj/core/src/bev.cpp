#include "advsim/bev.hpp"

#include <algorithm>
#include <cmath>

namespace advsim {

namespace {

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

Vec2 line_intersection(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double a1 = cross(q1, q2, p1);
  const double a2 = cross(q1, q2, p2);
  const double t = a1 / (a1 - a2);
  return p1 + t * (p2 - p1);
}

}  // namespace

std::array<Vec2, 4> bev_corners(const BBox3D& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hl = 0.5 * box.dims.length;
  const double hw = 0.5 * box.dims.width;
  const std::array<Vec2, 4> local{{{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}}};
  std::array<Vec2, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {box.center.x + c * local[i].x - s * local[i].y,
              box.center.y + s * local[i].x + c * local[i].y};
  }
  return out;
}

bool bev_contains(const BBox3D& box, Vec2 p) {
  const double dx = p.x - box.center.x;
  const double dy = p.y - box.center.y;
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double lx = c * dx + s * dy;
  const double ly = -s * dx + c * dy;
  return std::abs(lx) <= 0.5 * box.dims.length && std::abs(ly) <= 0.5 * box.dims.width;
}

double polygon_area(const std::vector<Vec2>& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip) {
  std::vector<Vec2> out = subject;
  for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
    const Vec2 c1 = clip[e];
    const Vec2 c2 = clip[(e + 1) % clip.size()];
    std::vector<Vec2> in = std::move(out);
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Vec2 cur = in[i];
      const Vec2 prev = in[(i + in.size() - 1) % in.size()];
      const bool cur_in = cross(c1, c2, cur) >= 0.0;
      const bool prev_in = cross(c1, c2, prev) >= 0.0;
      if (cur_in) {
        if (!prev_in) out.push_back(line_intersection(prev, cur, c1, c2));
        out.push_back(cur);
      } else if (prev_in) {
        out.push_back(line_intersection(prev, cur, c1, c2));
      }
    }
  }
  return out;
}

double bev_iou(const BBox3D& a, const BBox3D& b) {
  const double area_a = a.dims.length * a.dims.width;
  const double area_b = b.dims.length * b.dims.width;
  // Cheap reject on circumscribed circles.
  const double ra = 0.5 * std::hypot(a.dims.length, a.dims.width);
  const double rb = 0.5 * std::hypot(b.dims.length, b.dims.width);
  if (std::hypot(a.center.x - b.center.x, a.center.y - b.center.y) >= ra + rb) return 0.0;

  const auto ca = bev_corners(a);
  const auto cb = bev_corners(b);
  const std::vector<Vec2> pa(ca.begin(), ca.end());
  const std::vector<Vec2> pb(cb.begin(), cb.end());
  const auto inter_poly = clip_convex(pa, pb);
  const double inter = inter_poly.size() < 3 ? 0.0 : std::abs(polygon_area(inter_poly));
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace advsim
