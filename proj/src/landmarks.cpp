#include "raf/landmarks.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "raf/error.hpp"

namespace raf {
namespace {

constexpr double kSingularDeterminant = 1e-12;

bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

double parse_coordinate(std::string_view token, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw InvalidInput("line " + std::to_string(line_no) + ": non-numeric token '" +
                       std::string(token) + "'");
  }
  if (!std::isfinite(v)) {
    throw InvalidInput("line " + std::to_string(line_no) + ": non-finite value '" +
                       std::string(token) + "'");
  }
  return v;
}

LandmarkSet build_canonical_landmarks() {
  std::array<Point2, kLandmarkCount> p{};
  // Jaw: half ellipse from the right temple (image left) under the chin.
  for (int i = 0; i <= 16; ++i) {
    const double phi = std::numbers::pi - i * std::numbers::pi / 16.0;
    p[i] = {0.72 * std::cos(phi), -0.45 + 1.2 * std::sin(phi)};
  }
  const std::array<Point2, 5> brow = {{{-0.62, -0.66}, {-0.52, -0.74}, {-0.40, -0.77},
                                       {-0.28, -0.76}, {-0.15, -0.72}}};
  for (int i = 0; i < 5; ++i) {
    p[17 + i] = brow[i];
    p[26 - i] = {-brow[i].x, brow[i].y};
  }
  p[27] = {0.0, -0.50};
  p[28] = {0.0, -0.35};
  p[29] = {0.0, -0.20};
  p[30] = {0.0, -0.08};
  p[31] = {-0.13, -0.03};
  p[32] = {-0.065, -0.005};
  p[33] = {0.0, 0.0};
  p[34] = {0.065, -0.005};
  p[35] = {0.13, -0.03};
  const std::array<Point2, 6> eye = {{{-0.50, -0.50}, {-0.40, -0.56}, {-0.28, -0.56},
                                      {-0.18, -0.50}, {-0.28, -0.45}, {-0.40, -0.45}}};
  // Left eye mirrors the right: 42 is the inner corner, 45 the outer one.
  const std::array<int, 6> mirror = {45, 44, 43, 42, 47, 46};
  for (int i = 0; i < 6; ++i) {
    p[36 + i] = eye[i];
    p[mirror[i]] = {-eye[i].x, eye[i].y};
  }
  const std::array<Point2, 12> outer = {{{-0.25, 0.30}, {-0.16, 0.25}, {-0.07, 0.22},
                                         {0.0, 0.23}, {0.07, 0.22}, {0.16, 0.25},
                                         {0.25, 0.30}, {0.16, 0.36}, {0.07, 0.39},
                                         {0.0, 0.40}, {-0.07, 0.39}, {-0.16, 0.36}}};
  for (int i = 0; i < 12; ++i) p[48 + i] = outer[i];
  const std::array<Point2, 8> inner = {{{-0.20, 0.30}, {-0.07, 0.27}, {0.0, 0.275},
                                        {0.07, 0.27}, {0.20, 0.30}, {0.07, 0.33},
                                        {0.0, 0.335}, {-0.07, 0.33}}};
  for (int i = 0; i < 8; ++i) p[60 + i] = inner[i];
  return LandmarkSet(p);
}

}  // namespace

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

LandmarkSet::LandmarkSet(std::span<const Point2> points) {
  if (points.size() != kLandmarkCount) {
    throw InvalidInput("expected 68 points, found " + std::to_string(points.size()));
  }
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    if (!is_finite(points[i])) {
      throw InvalidInput("landmark " + std::to_string(i) + " is not finite");
    }
    points_[i] = points[i];
  }
}

FivePointSet::FivePointSet(const std::array<Point2, 5>& points) : points_(points) {
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = i + 1; j < 5; ++j) {
      if (points_[i] == points_[j]) {
        throw InvalidInput("degenerate landmarks: anchor points " + std::to_string(i) +
                           " and " + std::to_string(j) + " coincide");
      }
    }
  }
}

AffineTransform compose(const AffineTransform& f, const AffineTransform& g) {
  // (p*Af + bf)*Ag + bg
  AffineTransform r;
  r.a11 = f.a11 * g.a11 + f.a12 * g.a21;
  r.a12 = f.a11 * g.a12 + f.a12 * g.a22;
  r.a21 = f.a21 * g.a11 + f.a22 * g.a21;
  r.a22 = f.a21 * g.a12 + f.a22 * g.a22;
  r.tx = f.tx * g.a11 + f.ty * g.a21 + g.tx;
  r.ty = f.tx * g.a12 + f.ty * g.a22 + g.ty;
  return r;
}

const LandmarkSet& canonical_landmarks() {
  static const LandmarkSet lm = build_canonical_landmarks();
  return lm;
}

const ReferenceSpace& ReferenceSpace::canonical() {
  static const ReferenceSpace ref = [] {
    FivePointSet five = reference_points(canonical_landmarks());
    return ReferenceSpace{five, distance(five[0], five[1])};
  }();
  return ref;
}

LandmarkSet parse_landmarks(std::string_view text) {
  std::vector<Point2> pts;
  pts.reserve(kLandmarkCount);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    const auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) {
      throw InvalidInput("line " + std::to_string(line_no) + ": expected 2 values, found " +
                         std::to_string(tokens.size()));
    }
    const double x = parse_coordinate(tokens[0], line_no);
    const double y = parse_coordinate(tokens[1], line_no);
    pts.push_back({x, y});
  }
  if (pts.size() != kLandmarkCount) {
    throw InvalidInput("expected 68 points, found " + std::to_string(pts.size()));
  }
  return LandmarkSet(pts);
}

std::string serialize_landmarks(const LandmarkSet& lm) {
  std::string out;
  for (const Point2& p : lm.points()) {
    out += format_double(p.x);
    out += ' ';
    out += format_double(p.y);
    out += '\n';
  }
  return out;
}

LandmarkSet load_landmarks(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open landmark file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_landmarks(ss.str());
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

void save_landmarks(const LandmarkSet& lm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write landmark file " + path);
  out << serialize_landmarks(lm);
  if (!out) throw IoError("failed writing " + path);
}

FivePointSet reference_points(const LandmarkSet& lm) {
  std::array<Point2, 5> five{};
  for (std::size_t i = 0; i < 5; ++i) five[i] = lm[kAnchorIndices[i]];
  return FivePointSet(five);
}

AffineTransform estimate_affine(const FivePointSet& src, const FivePointSet& dst) {
  return estimate_affine(std::span<const Point2>(src.points()),
                         std::span<const Point2>(dst.points()));
}

AffineTransform estimate_affine(std::span<const Point2> src, std::span<const Point2> dst) {
  if (src.size() != dst.size() || src.size() < 3) {
    throw InvalidInput("affine estimation needs at least 3 matched point pairs");
  }
  const double n = static_cast<double>(src.size());

  // Normal equations on centred, RMS-normalised source coordinates. The translation
  // column decouples, leaving a 2x2 system per output coordinate.
  Point2 c{};
  for (const Point2& p : src) c = c + p;
  c = (1.0 / n) * c;
  double spread = 0.0;
  for (const Point2& p : src) {
    const Point2 d = p - c;
    spread += d.x * d.x + d.y * d.y;
  }
  const double s = std::sqrt(spread / n);
  if (!(s > 0.0)) throw NumericError("rank-deficient affine fit: source points coincide");

  double sxx = 0, sxy = 0, syy = 0, sxu = 0, syu = 0, sxv = 0, syv = 0, su = 0, sv = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double qx = (src[i].x - c.x) / s;
    const double qy = (src[i].y - c.y) / s;
    sxx += qx * qx;
    sxy += qx * qy;
    syy += qy * qy;
    sxu += qx * dst[i].x;
    syu += qy * dst[i].x;
    sxv += qx * dst[i].y;
    syv += qy * dst[i].y;
    su += dst[i].x;
    sv += dst[i].y;
  }
  const double det = (sxx * syy - sxy * sxy) / (n * n);
  if (std::abs(det) <= kSingularDeterminant) {
    throw NumericError("rank-deficient affine fit: source points are collinear");
  }
  const double inv = 1.0 / (sxx * syy - sxy * sxy);
  const double m11 = (syy * sxu - sxy * syu) * inv;
  const double m21 = (sxx * syu - sxy * sxu) * inv;
  const double m12 = (syy * sxv - sxy * syv) * inv;
  const double m22 = (sxx * syv - sxy * sxv) * inv;

  AffineTransform t;
  t.a11 = m11 / s;
  t.a21 = m21 / s;
  t.a12 = m12 / s;
  t.a22 = m22 / s;
  t.tx = su / n - (c.x * t.a11 + c.y * t.a21);
  t.ty = sv / n - (c.x * t.a12 + c.y * t.a22);
  return t;
}

double fit_residual(const AffineTransform& t, std::span<const Point2> src,
                    std::span<const Point2> dst) {
  double r = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Point2 d = dst[i] - t(src[i]);
    r += d.x * d.x + d.y * d.y;
  }
  return r;
}

std::vector<Point2> apply_affine(const AffineTransform& t, std::span<const Point2> pts) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (const Point2& p : pts) out.push_back(t(p));
  return out;
}

LandmarkSet apply_affine(const AffineTransform& t, const LandmarkSet& lm) {
  return LandmarkSet(apply_affine(t, std::span<const Point2>(lm.points())));
}

AffineTransform invert_affine(const AffineTransform& t) {
  const double det = t.determinant();
  if (!(std::abs(det) > kSingularDeterminant)) {
    throw NumericError("affine transform is not invertible (det = " + format_double(det) + ")");
  }
  AffineTransform r;
  r.a11 = t.a22 / det;
  r.a12 = -t.a12 / det;
  r.a21 = -t.a21 / det;
  r.a22 = t.a11 / det;
  r.tx = -(t.tx * r.a11 + t.ty * r.a21);
  r.ty = -(t.tx * r.a12 + t.ty * r.a22);
  return r;
}

ReferenceMapping to_reference(const LandmarkSet& lm, const ReferenceSpace& ref) {
  const AffineTransform t = estimate_affine(ref.canonical_five, reference_points(lm));
  return {apply_affine(invert_affine(t), lm), t};
}

}  // namespace raf
