#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "raf/error.hpp"
#include "raf/log.hpp"
#include "raf/warp.hpp"

namespace raf {
namespace {

struct TrianglePlan {
  std::array<Point2, 3> dst;
  AffineTransform dst_to_src;
  double orientation = 0.0;  // sign of the destination area
  double tolerance = 0.0;
  double min_y = 0.0, max_y = 0.0;
  bool identity = false;
  bool usable = false;  // non-degenerate and not folded
};

struct WarpPlan {
  std::vector<TrianglePlan> triangles;
  std::size_t folded = 0;
};

// Affine map taking triangle (d0, d1, d2) onto (s0, s1, s2).
AffineTransform triangle_affine(const std::array<Point2, 3>& d, const std::array<Point2, 3>& s) {
  const Point2 e1 = d[1] - d[0], e2 = d[2] - d[0];
  const Point2 f1 = s[1] - s[0], f2 = s[2] - s[0];
  const double det = e1.x * e2.y - e1.y * e2.x;
  // Rows of the inverse basis: q = (p - d0) * Binv gives barycentric (beta, gamma).
  const double i11 = e2.y / det, i12 = -e1.y / det;
  const double i21 = -e2.x / det, i22 = e1.x / det;
  AffineTransform t;
  t.a11 = i11 * f1.x + i12 * f2.x;
  t.a12 = i11 * f1.y + i12 * f2.y;
  t.a21 = i21 * f1.x + i22 * f2.x;
  t.a22 = i21 * f1.y + i22 * f2.y;
  t.tx = s[0].x - (d[0].x * t.a11 + d[0].y * t.a21);
  t.ty = s[0].y - (d[0].x * t.a12 + d[0].y * t.a22);
  return t;
}

WarpPlan make_plan(const Image& img, const WarpMesh& mesh) {
  if (mesh.width != img.width() || mesh.height != img.height()) {
    throw InvalidInput("warp mesh was built for " + std::to_string(mesh.width) + "x" +
                       std::to_string(mesh.height) + ", image is " + std::to_string(img.width()) +
                       "x" + std::to_string(img.height()));
  }
  if (mesh.src_points.size() != mesh.dst_points.size() ||
      mesh.src_points.size() != kLandmarkCount + kBorderAnchorCount) {
    throw InvalidInput("warp mesh point count mismatch");
  }
  const auto folded = folded_triangles(mesh);
  const int n = static_cast<int>(mesh.dst_points.size());

  WarpPlan plan;
  plan.triangles.reserve(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    TrianglePlan tp;
    std::array<Point2, 3> src{};
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= n) throw InvalidInput("triangle index out of range");
      tp.dst[k] = mesh.dst_points[tri[k]];
      src[k] = mesh.src_points[tri[k]];
    }
    const double area2 = signed_area2(tp.dst[0], tp.dst[1], tp.dst[2]);
    tp.orientation = area2 > 0 ? 1.0 : -1.0;
    tp.tolerance = 1e-9 * std::abs(area2);
    tp.min_y = std::min({tp.dst[0].y, tp.dst[1].y, tp.dst[2].y});
    tp.max_y = std::max({tp.dst[0].y, tp.dst[1].y, tp.dst[2].y});
    tp.identity = src == tp.dst;
    tp.usable = area2 != 0.0 && !folded[t];
    if (tp.usable) tp.dst_to_src = triangle_affine(tp.dst, src);
    if (folded[t]) ++plan.folded;
    plan.triangles.push_back(tp);
  }
  if (std::none_of(plan.triangles.begin(), plan.triangles.end(),
                   [](const TrianglePlan& t) { return t.usable; })) {
    throw NumericError("warp mesh has no usable triangle");
  }
  return plan;
}

bool contains(const TrianglePlan& t, Point2 p) {
  for (int k = 0; k < 3; ++k) {
    const Point2 a = t.dst[k], b = t.dst[(k + 1) % 3];
    if (t.orientation * signed_area2(a, b, p) < -t.tolerance) return false;
  }
  return true;
}

double segment_distance2(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a, ap = p - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  double u = len2 > 0 ? (ap.x * ab.x + ap.y * ab.y) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  const Point2 d = p - (a + u * ab);
  return d.x * d.x + d.y * d.y;
}

double triangle_distance2(const TrianglePlan& t, Point2 p) {
  if (contains(t, p)) return 0.0;
  return std::min({segment_distance2(p, t.dst[0], t.dst[1]), segment_distance2(p, t.dst[1], t.dst[2]),
                   segment_distance2(p, t.dst[2], t.dst[0])});
}

// Pixels outside every usable triangle borrow the nearest usable one.
int nearest_usable(const WarpPlan& plan, Point2 p) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < plan.triangles.size(); ++t) {
    if (!plan.triangles[t].usable) continue;
    const double d = triangle_distance2(plan.triangles[t], p);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(t);
    }
  }
  return best;
}

float bilinear(const Image& img, double sx, double sy, int c) {
  sx = std::clamp(sx, 0.0, static_cast<double>(img.width() - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = sx - x0, fy = sy - y0;
  const double top = (1.0 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
  const double bottom = (1.0 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
  const double v = (1.0 - fy) * top + fy * bottom;
  return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

void shade_pixel(const Image& img, const WarpPlan& plan, int located, int x, int y, Image& out) {
  const Point2 p{static_cast<double>(x), static_cast<double>(y)};
  int t = located;
  if (t < 0 || !plan.triangles[t].usable) t = nearest_usable(plan, p);
  const TrianglePlan& tp = plan.triangles[t];
  if (tp.identity) {
    for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(x, y, c);
    return;
  }
  const Point2 s = tp.dst_to_src(p);
  for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = bilinear(img, s.x, s.y, c);
}

void report_folds(const WarpPlan& plan) {
  if (plan.folded > 0) {
    log::warn(std::to_string(plan.folded) +
              " folded triangle(s) in warp mesh; using nearest valid triangle");
  }
}

}  // namespace

Image warp_image(const Image& img, const WarpMesh& mesh) {
  const WarpPlan plan = make_plan(img, mesh);
  report_folds(plan);

  // Candidate triangles per row, kept in triangle order so the first hit matches
  // the serial scan.
  std::vector<std::vector<int>> rows(img.height());
  for (std::size_t t = 0; t < plan.triangles.size(); ++t) {
    const auto& tp = plan.triangles[t];
    const int y0 = std::max(0, static_cast<int>(std::floor(tp.min_y)) - 1);
    const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(tp.max_y)) + 1);
    for (int y = y0; y <= y1; ++y) rows[y].push_back(static_cast<int>(t));
  }

  Image out(img.width(), img.height(), img.channels());
  const int height = img.height();
#pragma omp parallel for schedule(dynamic, 4)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Point2 p{static_cast<double>(x), static_cast<double>(y)};
      int located = -1;
      for (int t : rows[y]) {
        if (contains(plan.triangles[t], p)) {
          located = t;
          break;
        }
      }
      shade_pixel(img, plan, located, x, y, out);
    }
  }
  return out;
}

namespace serial {

Image warp_image(const Image& img, const WarpMesh& mesh) {
  const WarpPlan plan = make_plan(img, mesh);
  report_folds(plan);
  Image out(img.width(), img.height(), img.channels());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Point2 p{static_cast<double>(x), static_cast<double>(y)};
      int located = -1;
      for (std::size_t t = 0; t < plan.triangles.size(); ++t) {
        if (contains(plan.triangles[t], p)) {
          located = static_cast<int>(t);
          break;
        }
      }
      shade_pixel(img, plan, located, x, y, out);
    }
  }
  return out;
}

}  // namespace serial
}  // namespace raf
