#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace raf {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

double distance(Point2 a, Point2 b);

inline constexpr std::size_t kLandmarkCount = 68;

/// 68 facial points in the iBUG ordering: jaw 0-16, brows 17-26, nose 27-35,
/// eyes 36-47, mouth 48-67. Coordinates are finite by construction.
class LandmarkSet {
 public:
  LandmarkSet() = default;
  explicit LandmarkSet(std::span<const Point2> points);

  const Point2& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Point2, kLandmarkCount> points() const { return points_; }
  std::vector<Point2> to_vector() const { return {points_.begin(), points_.end()}; }

  friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;

 private:
  std::array<Point2, kLandmarkCount> points_{};
};

/// Landmark indices of the alignment anchors, in FivePointSet order:
/// outer eye corners, nose tip, mouth corners.
inline constexpr std::array<std::size_t, 5> kAnchorIndices = {36, 45, 33, 48, 54};

class FivePointSet {
 public:
  /// Throws InvalidInput when two points coincide.
  explicit FivePointSet(const std::array<Point2, 5>& points);

  const Point2& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Point2, 5> points() const { return points_; }

 private:
  std::array<Point2, 5> points_;
};

/// Row-vector affine map p -> p*A + b, i.e.
///   x' = a11*x + a21*y + tx
///   y' = a12*x + a22*y + ty
struct AffineTransform {
  double a11 = 1.0, a12 = 0.0;
  double a21 = 0.0, a22 = 1.0;
  double tx = 0.0, ty = 0.0;

  static AffineTransform identity() { return {}; }
  static AffineTransform translation(double dx, double dy) { return {1, 0, 0, 1, dx, dy}; }

  double determinant() const { return a11 * a22 - a12 * a21; }
  Point2 operator()(Point2 p) const {
    return {p.x * a11 + p.y * a21 + tx, p.x * a12 + p.y * a22 + ty};
  }
};

/// `first` applied, then `second`.
AffineTransform compose(const AffineTransform& first, const AffineTransform& second);

/// Canonical face frame: outer eye corners one unit apart, nose tip at the origin,
/// y pointing down as in image coordinates.
struct ReferenceSpace {
  FivePointSet canonical_five;
  double unit = 1.0;

  static const ReferenceSpace& canonical();
};

/// 68-point mean-face template expressed in the canonical reference frame.
const LandmarkSet& canonical_landmarks();

LandmarkSet parse_landmarks(std::string_view text);
std::string serialize_landmarks(const LandmarkSet& lm);
LandmarkSet load_landmarks(const std::string& path);
void save_landmarks(const LandmarkSet& lm, const std::string& path);

FivePointSet reference_points(const LandmarkSet& lm);

/// Least-squares affine fit of src onto dst. Throws NumericError when src is collinear.
AffineTransform estimate_affine(const FivePointSet& src, const FivePointSet& dst);
AffineTransform estimate_affine(std::span<const Point2> src, std::span<const Point2> dst);

/// Sum of squared residuals ||dst_i - t(src_i)||^2.
double fit_residual(const AffineTransform& t, std::span<const Point2> src,
                    std::span<const Point2> dst);

std::vector<Point2> apply_affine(const AffineTransform& t, std::span<const Point2> pts);
LandmarkSet apply_affine(const AffineTransform& t, const LandmarkSet& lm);

/// Throws NumericError when |det A| <= 1e-12.
AffineTransform invert_affine(const AffineTransform& t);

struct ReferenceMapping {
  LandmarkSet landmarks;      ///< input landmarks expressed in the reference frame
  AffineTransform to_input;   ///< reference -> input
};

ReferenceMapping to_reference(const LandmarkSet& lm, const ReferenceSpace& ref);

}  // namespace raf
