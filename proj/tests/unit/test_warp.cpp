#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "mesh_oracle.hpp"
#include "raf/error.hpp"
#include "raf/log.hpp"
#include "raf/synthetic.hpp"
#include "raf/warp.hpp"

namespace raf {
namespace {

class WarpTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { log::set_quiet(true); }
};

bool in_set(const std::vector<std::size_t>& v, std::size_t i) {
  return std::find(v.begin(), v.end(), i) != v.end();
}

Image horizontal_gradient(int w, int h) {
  Image img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<float>(x) / (w - 1);
  return img;
}

float bilinear_at(const Image& img, Point2 p, int c) {
  const double x = std::clamp(p.x, 0.0, img.width() - 1.0);
  const double y = std::clamp(p.y, 0.0, img.height() - 1.0);
  const int x0 = int(std::floor(x)), y0 = int(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1), y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0, fy = y - y0;
  return float((1 - fy) * ((1 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c)) +
               fy * ((1 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c)));
}

TEST_F(WarpTest, NamesRoundTrip) {
  for (WarpFunction wf : kAllWarpFunctions) {
    EXPECT_EQ(parse_warp_function(to_string(wf)), wf);
    EXPECT_EQ(parse_warp_function(short_name(wf)), wf);
  }
  EXPECT_THROW(parse_warp_function("frown"), InvalidInput);
}

TEST_F(WarpTest, ScaleOutsideCapIsRejected) {
  EXPECT_THROW(WarpSpec(WarpFunction::Smile, 0.51), InvalidInput);
  EXPECT_THROW(WarpSpec(WarpFunction::Smile, -0.01), InvalidInput);
  EXPECT_THROW(WarpSpec(WarpFunction::Smile, std::nan("")), InvalidInput);
  EXPECT_THROW(displace_landmarks(canonical_landmarks(), WarpFunction::Smile, 0.6), InvalidInput);
  EXPECT_NO_THROW(WarpSpec(WarpFunction::Smile, 0.5));
}

TEST_F(WarpTest, ZeroScaleLeavesLandmarksUntouched) {
  for (WarpFunction wf : kAllWarpFunctions) {
    EXPECT_EQ(displace_landmarks(canonical_landmarks(), wf, 0.0), canonical_landmarks());
  }
}

TEST_F(WarpTest, RaiseEyebrowRecipe) {
  const LandmarkSet& ref = canonical_landmarks();
  const LandmarkSet out = displace_landmarks(ref, WarpFunction::RaiseEyebrow, 0.2);
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    if (i >= 17 && i <= 26) {
      EXPECT_EQ(out[i].x, ref[i].x) << i;
      EXPECT_NEAR(out[i].y, ref[i].y - 0.2, 1e-15) << i;
    } else {
      EXPECT_EQ(out[i], ref[i]) << i;
    }
  }
}

TEST_F(WarpTest, RecipeTableValues) {
  const LandmarkSet& ref = canonical_landmarks();
  const auto smile = landmark_displacements(ref, WarpFunction::Smile, 0.1);
  EXPECT_NEAR(smile[48].x, -0.06, 1e-15);
  EXPECT_NEAR(smile[48].y, -0.06, 1e-15);
  EXPECT_NEAR(smile[54].x, 0.06, 1e-15);
  EXPECT_NEAR(smile[49].x, -0.03, 1e-15);
  EXPECT_NEAR(smile[55].y, -0.03, 1e-15);

  const auto nose = landmark_displacements(ref, WarpFunction::StretchNose, 0.2);
  EXPECT_EQ(nose[33], (Point2{0, 0}));
  EXPECT_NEAR(std::hypot(nose[27].x, nose[27].y), 0.2, 1e-15);  // farthest from the tip
  const double d31 = distance(ref[31], ref[33]) / distance(ref[27], ref[33]);
  EXPECT_NEAR(std::hypot(nose[31].x, nose[31].y), 0.2 * d31, 1e-15);

  const auto chubby = landmark_displacements(ref, WarpFunction::Chubbify, 0.3);
  for (std::size_t i = 0; i <= 16; ++i) EXPECT_NEAR(std::hypot(chubby[i].x, chubby[i].y), 0.3, 1e-15);

  const auto eyes = landmark_displacements(ref, WarpFunction::OpenEyes, 0.2);
  EXPECT_NEAR(eyes[37].y, -0.1, 1e-15);
  EXPECT_NEAR(eyes[46].y, 0.1, 1e-15);
  EXPECT_NEAR(eyes[20].y, -0.05, 1e-15);
  EXPECT_EQ(eyes[36], (Point2{0, 0}));
}

TEST_F(WarpTest, DisplacementsAreLinearInScale) {
  const SyntheticFace face = make_synthetic_face(4);
  const LandmarkSet ref = to_reference(face.landmarks, ReferenceSpace::canonical()).landmarks;
  for (WarpFunction wf : kAllWarpFunctions) {
    const auto d1 = landmark_displacements(ref, wf, 0.1);
    const auto d2 = landmark_displacements(ref, wf, 0.2);
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      EXPECT_EQ(d2[i], 2.0 * d1[i]) << to_string(wf) << " index " << i;
    }
  }
}

TEST_F(WarpTest, OnlyDrivenIndicesMove) {
  const LandmarkSet& ref = canonical_landmarks();
  for (WarpFunction wf : kAllWarpFunctions) {
    const auto driven = driven_indices(wf);
    const LandmarkSet out = displace_landmarks(ref, wf, 0.3);
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      if (in_set(driven, i)) {
        EXPECT_NE(out[i], ref[i]) << to_string(wf) << " " << i;
      } else {
        EXPECT_EQ(out[i], ref[i]) << to_string(wf) << " " << i;
      }
    }
  }
}

TEST_F(WarpTest, SearchFunctionsDriveDisjointLandmarks) {
  const std::array<WarpFunction, 3> tree = {WarpFunction::RaiseEyebrow, WarpFunction::Smile,
                                            WarpFunction::StretchNose};
  for (std::size_t a = 0; a < tree.size(); ++a) {
    for (std::size_t b = a + 1; b < tree.size(); ++b) {
      for (std::size_t i : driven_indices(tree[a])) EXPECT_FALSE(in_set(driven_indices(tree[b]), i));
    }
  }
}

TEST_F(WarpTest, DelaunayEmptyCircumcircle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(0.0, 100.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point2> pts(40);
    for (auto& p : pts) p = {coord(rng), coord(rng)};
    const auto tris = delaunay_triangulate(pts);
    EXPECT_EQ(tris.size(), 2 * pts.size() - 2 - testing::hull_size(pts));
    for (const auto& t : tris) {
      const Point2 a = pts[t[0]], b = pts[t[1]], c = pts[t[2]];
      ASSERT_GT(signed_area2(a, b, c), 0.0);
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (int(k) == t[0] || int(k) == t[1] || int(k) == t[2]) continue;
        const Point2 pa = a - pts[k], pb = b - pts[k], pc = c - pts[k];
        const double det = (pa.x * pa.x + pa.y * pa.y) * (pb.x * pc.y - pc.x * pb.y) -
                           (pb.x * pb.x + pb.y * pb.y) * (pa.x * pc.y - pc.x * pa.y) +
                           (pc.x * pc.x + pc.y * pc.y) * (pa.x * pb.y - pb.x * pa.y);
        ASSERT_LE(det, 1e-6) << "point " << k << " inside a circumcircle";
      }
    }
  }
}

TEST_F(WarpTest, MeshForIdenticalLandmarks) {
  const SyntheticFace face = make_synthetic_face(0);
  const WarpMesh mesh = build_warp_mesh(face.landmarks, face.landmarks, 128, 128);
  EXPECT_EQ(mesh.src_points, mesh.dst_points);
  EXPECT_EQ(mesh.dst_points.size(), kLandmarkCount + kBorderAnchorCount);
}

TEST_F(WarpTest, MeshCoversEveryPixelWithinEulerBound) {
  for (int id = 0; id < 3; ++id) {
    const SyntheticFace face = make_synthetic_face(id);
    const LandmarkSet ref = to_reference(face.landmarks, ReferenceSpace::canonical()).landmarks;
    const auto mapping = to_reference(face.landmarks, ReferenceSpace::canonical());
    const LandmarkSet dst =
        apply_affine(mapping.to_input, displace_landmarks(ref, WarpFunction::Smile, 0.2));
    const WarpMesh mesh = build_warp_mesh(face.landmarks, dst, 128, 128);
    const std::size_t h = testing::hull_size(mesh.dst_points);
    EXPECT_LE(mesh.triangles.size(), 2 * 76 - 2 - h);
    const auto all = testing::all_triangles(mesh);
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 128; ++x) ASSERT_TRUE(testing::covered(mesh, {double(x), double(y)}, all)) << x << "," << y;
  }
}

TEST_F(WarpTest, OutOfFrameLandmarkIsRejected) {
  const SyntheticFace face = make_synthetic_face(0);
  auto pts = face.landmarks.to_vector();
  pts[0] = {-0.5 * 128, 0};
  EXPECT_THROW(build_warp_mesh(face.landmarks, LandmarkSet(pts), 128, 128), InvalidInput);
}

TEST_F(WarpTest, IdentityMeshIsExact) {
  const SyntheticFace face = make_synthetic_face(1);
  const WarpMesh mesh = build_warp_mesh(face.landmarks, face.landmarks, 128, 128);
  EXPECT_EQ(warp_image(face.image, mesh), face.image);
}

TEST_F(WarpTest, TranslatedTriangleOnGradient) {
  const SyntheticFace face = make_synthetic_face(0);
  const Image grad = horizontal_gradient(128, 128);
  const WarpMesh base = build_warp_mesh(face.landmarks, face.landmarks, 128, 128);

  bool checked = false;
  for (const Triangle& t : base.triangles) {
    if (t[0] >= 68 || t[1] >= 68 || t[2] >= 68) continue;
    auto pts = face.landmarks.to_vector();
    for (int v : t) pts[v] = pts[v] + Point2{3, 0};
    const LandmarkSet dst(pts);
    const WarpMesh mesh = build_warp_mesh(face.landmarks, dst, 128, 128);
    auto found = std::find_if(mesh.triangles.begin(), mesh.triangles.end(), [&](const Triangle& m) {
      return std::set<int>(m.begin(), m.end()) == std::set<int>(t.begin(), t.end());
    });
    if (found == mesh.triangles.end()) continue;

    const Image out = warp_image(grad, mesh);
    const std::vector<std::size_t> moved(t.begin(), t.end());
    std::vector<std::size_t> affected;
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
      const auto& m = mesh.triangles[k];
      if (in_set(moved, m[0]) || in_set(moved, m[1]) || in_set(moved, m[2])) affected.push_back(k);
    }
    int inside = 0;
    for (int y = 0; y < 128; ++y) {
      for (int x = 0; x < 128; ++x) {
        const Point2 p{double(x), double(y)};
        const Point2 a = mesh.dst_points[t[0]], b = mesh.dst_points[t[1]], c = mesh.dst_points[t[2]];
        const bool strictly_inside = testing::point_in_triangle(p, a, b, c, -1e-6);
        if (strictly_inside && x >= 3) {
          ASSERT_EQ(out.at(x, y), grad.at(x - 3, y)) << x << "," << y;
          ++inside;
        } else if (!testing::covered(mesh, p, affected)) {
          ASSERT_EQ(out.at(x, y), grad.at(x, y)) << x << "," << y;
        }
      }
    }
    if (inside > 0) {
      checked = true;
      break;
    }
  }
  EXPECT_TRUE(checked);
}

TEST_F(WarpTest, ConstantImageStaysConstant) {
  const SyntheticFace face = make_synthetic_face(2);
  const Image gray(128, 128, 3, 0.5f);
  const auto r = warp_face(gray, face.landmarks, WarpSpec(WarpFunction::Chubbify, 0.3));
  for (float v : r.image.samples()) ASSERT_EQ(v, 0.5f);
}

TEST_F(WarpTest, MeshMustMatchImage) {
  const SyntheticFace face = make_synthetic_face(0);
  const WarpMesh mesh = build_warp_mesh(face.landmarks, face.landmarks, 128, 128);
  EXPECT_THROW(warp_image(Image(64, 128, 1), mesh), InvalidInput);
}

TEST_F(WarpTest, ZeroScaleWarpFaceIsExact) {
  for (int id = 0; id < 3; ++id) {
    const SyntheticFace face = make_synthetic_face(id);
    for (WarpFunction wf : kAllWarpFunctions) {
      const auto r = warp_face(face.image, face.landmarks, WarpSpec(wf, 0.0));
      EXPECT_EQ(r.image, face.image);
      for (std::size_t i = 0; i < kLandmarkCount; ++i) EXPECT_LT(distance(r.landmarks[i], face.landmarks[i]), 1e-6);
    }
  }
}

TEST_F(WarpTest, RaiseEyebrowChangesStayLocal) {
  const SyntheticFace face = make_synthetic_face(0);
  const auto r = warp_face(face.image, face.landmarks, WarpSpec(WarpFunction::RaiseEyebrow, 0.2));
  const WarpMesh mesh = build_warp_mesh(face.landmarks, r.landmarks, 128, 128);
  const auto region = testing::dilated_region(mesh, driven_indices(WarpFunction::RaiseEyebrow));
  const auto changed = testing::changed_pixels(face.image, r.image);
  EXPECT_FALSE(changed.empty());
  for (Point2 p : changed) ASSERT_TRUE(testing::covered(mesh, p, region)) << p.x << "," << p.y;
}

// Smooth shading keeps the comparison within bilinear interpolation error; the
// attack fixtures carry a deliberately high-frequency texture.
TEST_F(WarpTest, ControlPointsCarryTheirSourceValue) {
  const SyntheticFace face = make_synthetic_face(3);
  Image smooth(128, 128, 3);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      for (int c = 0; c < 3; ++c)
        smooth.at(x, y, c) = float(0.5 + 0.3 * std::sin(2 * M_PI * x / 128.0 + c) * std::cos(2 * M_PI * y / 128.0));
  for (WarpFunction wf : kAllWarpFunctions) {
    const auto r = warp_face(smooth, face.landmarks, WarpSpec(wf, 0.2));
    for (std::size_t i : driven_indices(wf)) {
      for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(bilinear_at(r.image, r.landmarks[i], c), bilinear_at(smooth, face.landmarks[i], c),
                    2.0 / 255.0)
            << to_string(wf) << " landmark " << i;
      }
    }
  }
}

TEST_F(WarpTest, CompositeIsDeterministicAndInRange) {
  const SyntheticFace face = make_synthetic_face(5);
  auto run = [&] {
    const auto a = warp_face(face.image, face.landmarks, WarpSpec(WarpFunction::StretchNose, 0.1));
    return warp_face(a.image, a.landmarks, WarpSpec(WarpFunction::Smile, 0.1));
  };
  const auto first = run();
  const auto second = run();
  EXPECT_EQ(first.image, second.image);
  EXPECT_EQ(first.landmarks, second.landmarks);
  for (float v : first.image.samples()) ASSERT_TRUE(std::isfinite(v) && v >= 0.0f && v <= 1.0f);
}

TEST_F(WarpTest, FoldedMeshStillProducesValidImage) {
  const SyntheticFace face = make_synthetic_face(0);
  WarpResult r{face.image, face.landmarks};
  for (int i = 0; i < 4; ++i) r = warp_face(r.image, r.landmarks, WarpSpec(WarpFunction::StretchNose, 0.3));
  for (float v : r.image.samples()) ASSERT_TRUE(std::isfinite(v) && v >= 0.0f && v <= 1.0f);
}

}  // namespace
}  // namespace raf
