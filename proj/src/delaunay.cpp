#include "raf/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "raf/error.hpp"

namespace raf {
namespace {

struct WorkTriangle {
  std::array<int, 3> v;
  Point2 centre;
  double radius2;
};

WorkTriangle make_triangle(std::span<const Point2> pts, int a, int b, int c) {
  if (signed_area2(pts[a], pts[b], pts[c]) < 0) std::swap(b, c);
  const Point2 pa = pts[a], pb = pts[b], pc = pts[c];
  const double d = 2.0 * (pa.x * (pb.y - pc.y) + pb.x * (pc.y - pa.y) + pc.x * (pa.y - pb.y));
  const double a2 = pa.x * pa.x + pa.y * pa.y;
  const double b2 = pb.x * pb.x + pb.y * pb.y;
  const double c2 = pc.x * pc.x + pc.y * pc.y;
  const Point2 centre{(a2 * (pb.y - pc.y) + b2 * (pc.y - pa.y) + c2 * (pa.y - pb.y)) / d,
                      (a2 * (pc.x - pb.x) + b2 * (pa.x - pc.x) + c2 * (pb.x - pa.x)) / d};
  const double dx = pa.x - centre.x, dy = pa.y - centre.y;
  return {{a, b, c}, centre, dx * dx + dy * dy};
}

// Strict in-circle predicate on a counter-clockwise triangle.
bool in_circumcircle(std::span<const Point2> pts, const WorkTriangle& t, Point2 p) {
  const Point2 a = pts[t.v[0]] - p, b = pts[t.v[1]] - p, c = pts[t.v[2]] - p;
  const double det = (a.x * a.x + a.y * a.y) * (b.x * c.y - c.x * b.y) -
                     (b.x * b.x + b.y * b.y) * (a.x * c.y - c.x * a.y) +
                     (c.x * c.x + c.y * c.y) * (a.x * b.y - b.x * a.y);
  return det > 0.0;
}

}  // namespace

double signed_area2(Point2 a, Point2 b, Point2 c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

namespace {

// Points on the convex hull boundary, collinear ones included.
std::size_t boundary_count(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(),
            [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (pts.size() < 3) return pts.size();
  std::vector<Point2> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && signed_area2(h[k - 2], h[k - 1], pts[i]) < 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && signed_area2(h[k - 2], h[k - 1], pts[i - 1]) < 0) --k;
    h[k++] = pts[i - 1];
  }
  return k - 1;
}

std::vector<Triangle> bowyer_watson(std::span<const Point2> points, double reach,
                                    std::vector<Point2>& inserted) {
  double min_x = points[0].x, max_x = points[0].x;
  double min_y = points[0].y, max_y = points[0].y;
  for (const Point2& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1.0});
  const double cx = 0.5 * (min_x + max_x), cy = 0.5 * (min_y + max_y);

  std::vector<Point2> pts(points.begin(), points.end());
  const int n = static_cast<int>(points.size());
  pts.push_back({cx - 2.0 * reach * span, cy - reach * span});
  pts.push_back({cx + 2.0 * reach * span, cy - reach * span});
  pts.push_back({cx, cy + 2.0 * reach * span});

  std::vector<WorkTriangle> tris{make_triangle(pts, n, n + 1, n + 2)};
  inserted.clear();
  for (int i = 0; i < n; ++i) {
    const Point2 p = pts[i];
    if (std::find(inserted.begin(), inserted.end(), p) != inserted.end()) continue;

    std::vector<WorkTriangle> kept;
    std::map<std::pair<int, int>, int> edge_use;
    std::vector<std::pair<int, int>> edges;
    for (const WorkTriangle& t : tris) {
      if (in_circumcircle(pts, t, p)) {
        for (int k = 0; k < 3; ++k) {
          const int a = t.v[k], b = t.v[(k + 1) % 3];
          const auto key = std::minmax(a, b);
          if (edge_use[key]++ == 0) edges.emplace_back(a, b);
        }
      } else {
        kept.push_back(t);
      }
    }
    if (edges.empty()) continue;
    for (const auto& [a, b] : edges) {
      if (edge_use[std::minmax(a, b)] != 1) continue;
      if (signed_area2(pts[a], pts[b], p) == 0.0) continue;
      kept.push_back(make_triangle(pts, a, b, i));
    }
    tris = std::move(kept);
    inserted.push_back(p);
  }

  std::vector<Triangle> out;
  for (const WorkTriangle& t : tris) {
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    out.push_back(t.v);
  }
  return out;
}

}  // namespace

std::vector<Triangle> delaunay_triangulate(std::span<const Point2> points) {
  if (points.size() < 3) throw InvalidInput("triangulation needs at least 3 points");

  // A finite super triangle can swallow thin hull triangles whose circumcircle
  // reaches one of its corners. Grow it until the triangle count matches Euler's
  // formula for a complete triangulation of the hull.
  std::vector<Point2> inserted;
  std::vector<Triangle> best;
  for (double reach : {20.0, 200.0, 2000.0, 20000.0}) {
    auto tris = bowyer_watson(points, reach, inserted);
    const std::size_t expected = 2 * inserted.size() - 2 - boundary_count(inserted);
    const bool complete = tris.size() == expected;
    if (complete || tris.size() > best.size()) best = std::move(tris);
    if (complete) break;
  }
  return best;
}

}  // namespace raf
