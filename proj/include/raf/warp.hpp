#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "raf/delaunay.hpp"
#include "raf/image.hpp"
#include "raf/landmarks.hpp"

namespace raf {

enum class WarpFunction { RaiseEyebrow, Smile, StretchNose, Chubbify, OpenEyes };

inline constexpr std::array<WarpFunction, 5> kAllWarpFunctions = {
    WarpFunction::RaiseEyebrow, WarpFunction::Smile, WarpFunction::StretchNose,
    WarpFunction::Chubbify, WarpFunction::OpenEyes};

/// Long name, e.g. "stretch_nose".
std::string_view to_string(WarpFunction wf);
/// Short name used on the command line: re, smile, sn, chubby, eyes.
std::string_view short_name(WarpFunction wf);
/// Accepts either the long or the short name.
WarpFunction parse_warp_function(std::string_view name);

inline constexpr double kMaxWarpScale = 0.5;

/// One node of the search tree. Scale is in reference-space units, 0 <= scale <= 0.5.
class WarpSpec {
 public:
  WarpSpec(WarpFunction function, double scale);

  WarpFunction function() const { return function_; }
  double scale() const { return scale_; }

  friend bool operator==(const WarpSpec&, const WarpSpec&) = default;

 private:
  WarpFunction function_;
  double scale_;
};

/// Landmarks that a warping function moves at non-zero scale.
std::vector<std::size_t> driven_indices(WarpFunction wf);

/// Per-landmark displacement in reference space. Computed as scale * (fixed vector),
/// so displacements are exactly linear in scale.
std::array<Point2, kLandmarkCount> landmark_displacements(const LandmarkSet& lm_ref,
                                                          WarpFunction wf, double scale,
                                                          double unit = 1.0);

LandmarkSet displace_landmarks(const LandmarkSet& lm_ref, WarpFunction wf, double scale,
                               double unit = 1.0);

inline constexpr std::size_t kBorderAnchorCount = 8;

/// Piecewise-affine deformation: 68 landmarks plus 8 fixed border anchors, triangulated
/// on the destination points.
struct WarpMesh {
  int width = 0;
  int height = 0;
  std::vector<Point2> src_points;
  std::vector<Point2> dst_points;
  std::vector<Triangle> triangles;
};

/// Throws InvalidInput when a destination landmark leaves [-0.25*dim, 1.25*dim].
WarpMesh build_warp_mesh(const LandmarkSet& src_lm, const LandmarkSet& dst_lm, int width,
                         int height);

/// Triangles whose source image has the opposite orientation to the destination one.
std::vector<bool> folded_triangles(const WarpMesh& mesh);

/// Backward piecewise-affine warp with bilinear sampling and clamp-to-edge.
/// OpenMP-parallel over output rows.
Image warp_image(const Image& img, const WarpMesh& mesh);

namespace serial {
/// Straight per-pixel scan over every triangle. Reference for warp_image.
Image warp_image(const Image& img, const WarpMesh& mesh);
}  // namespace serial

struct WarpResult {
  Image image;
  LandmarkSet landmarks;
};

WarpResult warp_face(const Image& img, const LandmarkSet& lm, const WarpSpec& spec,
                     const ReferenceSpace& ref = ReferenceSpace::canonical());

}  // namespace raf
