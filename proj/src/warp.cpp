#include "raf/warp.hpp"

#include <algorithm>
#include <cmath>

#include "raf/error.hpp"

namespace raf {
namespace {

struct FunctionName {
  WarpFunction function;
  std::string_view name;
  std::string_view short_name;
};

constexpr std::array<FunctionName, 5> kNames = {{
    {WarpFunction::RaiseEyebrow, "raise_eyebrow", "re"},
    {WarpFunction::Smile, "smile", "smile"},
    {WarpFunction::StretchNose, "stretch_nose", "sn"},
    {WarpFunction::Chubbify, "chubbify", "chubby"},
    {WarpFunction::OpenEyes, "open_eyes", "eyes"},
}};

constexpr std::size_t kNoseTip = 33;

std::vector<std::size_t> index_range(std::size_t first, std::size_t last) {
  std::vector<std::size_t> v;
  for (std::size_t i = first; i <= last; ++i) v.push_back(i);
  return v;
}

}  // namespace

std::string_view to_string(WarpFunction wf) {
  for (const auto& n : kNames) {
    if (n.function == wf) return n.name;
  }
  return "unknown";
}

std::string_view short_name(WarpFunction wf) {
  for (const auto& n : kNames) {
    if (n.function == wf) return n.short_name;
  }
  return "unknown";
}

WarpFunction parse_warp_function(std::string_view name) {
  for (const auto& n : kNames) {
    if (name == n.name || name == n.short_name) return n.function;
  }
  throw InvalidInput("unknown warping function '" + std::string(name) + "'");
}

WarpSpec::WarpSpec(WarpFunction function, double scale) : function_(function), scale_(scale) {
  if (!(scale >= 0.0 && scale <= kMaxWarpScale)) {
    throw InvalidInput("warp scale must be within [0, 0.5], got " + std::to_string(scale));
  }
}

std::vector<std::size_t> driven_indices(WarpFunction wf) {
  switch (wf) {
    case WarpFunction::RaiseEyebrow:
      return index_range(17, 26);
    case WarpFunction::Smile:
      return {48, 49, 53, 54, 55, 59};
    case WarpFunction::StretchNose:
      return {27, 28, 29, 30, 31, 32, 34, 35};
    case WarpFunction::Chubbify:
      return index_range(0, 16);
    case WarpFunction::OpenEyes: {
      auto v = index_range(17, 26);
      v.insert(v.end(), {37, 38, 40, 41, 43, 44, 46, 47});
      return v;
    }
  }
  return {};
}

std::array<Point2, kLandmarkCount> landmark_displacements(const LandmarkSet& lm_ref,
                                                          WarpFunction wf, double scale,
                                                          double unit) {
  // Leave the input untouched for a rejected scale before computing anything.
  WarpSpec checked(wf, scale);
  (void)checked;

  std::array<Point2, kLandmarkCount> d{};
  const Point2 tip = lm_ref[kNoseTip];
  switch (wf) {
    case WarpFunction::RaiseEyebrow:
      for (std::size_t i = 17; i <= 26; ++i) d[i] = scale * Point2{0.0, -unit};
      break;
    case WarpFunction::Smile: {
      const double out = lm_ref[48].x < lm_ref[54].x ? 1.0 : -1.0;
      const Point2 left = scale * Point2{-out * 0.6 * unit, -0.6 * unit};
      const Point2 right = scale * Point2{out * 0.6 * unit, -0.6 * unit};
      const Point2 left_half = scale * Point2{-out * 0.3 * unit, -0.3 * unit};
      const Point2 right_half = scale * Point2{out * 0.3 * unit, -0.3 * unit};
      d[48] = left;
      d[49] = left_half;
      d[59] = left_half;
      d[54] = right;
      d[53] = right_half;
      d[55] = right_half;
      break;
    }
    case WarpFunction::StretchNose: {
      double max_dist = 0.0;
      for (std::size_t i = 27; i <= 35; ++i) max_dist = std::max(max_dist, distance(lm_ref[i], tip));
      if (max_dist <= 0.0) throw InvalidInput("degenerate nose landmarks");
      for (std::size_t i = 27; i <= 35; ++i) {
        if (i == kNoseTip) continue;
        d[i] = scale * ((unit / max_dist) * (lm_ref[i] - tip));
      }
      break;
    }
    case WarpFunction::Chubbify:
      for (std::size_t i = 0; i <= 16; ++i) {
        const double r = distance(lm_ref[i], tip);
        if (r <= 0.0) throw InvalidInput("jaw landmark coincides with the nose tip");
        d[i] = scale * ((unit / r) * (lm_ref[i] - tip));
      }
      break;
    case WarpFunction::OpenEyes:
      for (std::size_t i : {37, 38, 43, 44}) d[i] = scale * Point2{0.0, -0.5 * unit};
      for (std::size_t i : {40, 41, 46, 47}) d[i] = scale * Point2{0.0, 0.5 * unit};
      for (std::size_t i = 17; i <= 26; ++i) d[i] = scale * Point2{0.0, -0.25 * unit};
      break;
  }
  return d;
}

LandmarkSet displace_landmarks(const LandmarkSet& lm_ref, WarpFunction wf, double scale,
                               double unit) {
  const auto d = landmark_displacements(lm_ref, wf, scale, unit);
  std::array<Point2, kLandmarkCount> out{};
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    out[i] = (d[i] == Point2{}) ? lm_ref[i] : lm_ref[i] + d[i];
  }
  return LandmarkSet(out);
}

WarpMesh build_warp_mesh(const LandmarkSet& src_lm, const LandmarkSet& dst_lm, int width,
                         int height) {
  if (width < 2 || height < 2) throw InvalidInput("warp needs an image of at least 2x2 pixels");
  const double w = width, h = height;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const Point2 p = dst_lm[i];
    if (p.x < -0.25 * w || p.x > 1.25 * w || p.y < -0.25 * h || p.y > 1.25 * h) {
      throw InvalidInput("warped landmark " + std::to_string(i) + " is out of frame");
    }
  }

  WarpMesh mesh;
  mesh.width = width;
  mesh.height = height;
  mesh.src_points = src_lm.to_vector();
  mesh.dst_points = dst_lm.to_vector();
  const double xm = 0.5 * (w - 1), ym = 0.5 * (h - 1);
  const std::array<Point2, kBorderAnchorCount> anchors = {{{0, 0}, {xm, 0}, {w - 1, 0},
                                                            {w - 1, ym}, {w - 1, h - 1},
                                                            {xm, h - 1}, {0, h - 1}, {0, ym}}};
  for (const Point2& a : anchors) {
    mesh.src_points.push_back(a);
    mesh.dst_points.push_back(a);
  }
  mesh.triangles = delaunay_triangulate(mesh.dst_points);
  return mesh;
}

std::vector<bool> folded_triangles(const WarpMesh& mesh) {
  std::vector<bool> folded(mesh.triangles.size(), false);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& [a, b, c] = mesh.triangles[t];
    const double src = signed_area2(mesh.src_points[a], mesh.src_points[b], mesh.src_points[c]);
    const double dst = signed_area2(mesh.dst_points[a], mesh.dst_points[b], mesh.dst_points[c]);
    folded[t] = src == 0.0 || (src > 0.0) != (dst > 0.0);
  }
  return folded;
}

WarpResult warp_face(const Image& img, const LandmarkSet& lm, const WarpSpec& spec,
                     const ReferenceSpace& ref) {
  const ReferenceMapping mapping = to_reference(lm, ref);
  const auto d_ref =
      landmark_displacements(mapping.landmarks, spec.function(), spec.scale(), ref.unit);

  // Displacements go through the linear part of the reference->input map and are
  // added to the input landmarks, so undriven points stay bit-identical.
  const AffineTransform& t = mapping.to_input;
  std::array<Point2, kLandmarkCount> dst{};
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const Point2 d = d_ref[i];
    if (d == Point2{}) {
      dst[i] = lm[i];
    } else {
      dst[i] = lm[i] + Point2{d.x * t.a11 + d.y * t.a21, d.x * t.a12 + d.y * t.a22};
    }
  }
  LandmarkSet dst_lm(dst);
  const WarpMesh mesh = build_warp_mesh(lm, dst_lm, img.width(), img.height());
  return {warp_image(img, mesh), std::move(dst_lm)};
}

}  // namespace raf
