#pragma once

#include <array>
#include <span>
#include <vector>

#include "raf/landmarks.hpp"

namespace raf {

using Triangle = std::array<int, 3>;

/// Bowyer-Watson Delaunay triangulation. Output triangles are counter-clockwise in
/// a y-up frame (positive signed area), indices refer to `points`. Exact duplicate
/// points are skipped and never referenced.
std::vector<Triangle> delaunay_triangulate(std::span<const Point2> points);

/// Twice the signed area of (a, b, c).
double signed_area2(Point2 a, Point2 b, Point2 c);

}  // namespace raf
