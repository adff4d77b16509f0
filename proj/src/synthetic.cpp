#include "raf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "raf/error.hpp"

namespace raf {
namespace {

double gaussian(Point2 p, Point2 c, double sx, double sy) {
  const double dx = (p.x - c.x) / sx, dy = (p.y - c.y) / sy;
  return std::exp(-0.5 * (dx * dx + dy * dy));
}

Point2 mean_of(const LandmarkSet& lm, std::size_t first, std::size_t last) {
  Point2 c{};
  for (std::size_t i = first; i <= last; ++i) c = c + lm[i];
  return (1.0 / static_cast<double>(last - first + 1)) * c;
}

}  // namespace

SyntheticFace make_synthetic_face(int identity, int width, int height) {
  const double w = width, h = height;
  const double u = 0.42 * w * (1.0 + 0.03 * ((identity % 3) - 1));
  const double tilt = 0.04 * ((identity % 5) - 2);
  const Point2 tip{0.5 * w + 1.5 * ((identity % 4) - 1.5), 0.55 * h};

  AffineTransform pose;
  pose.a11 = u * std::cos(tilt);
  pose.a12 = u * std::sin(tilt);
  pose.a21 = -u * std::sin(tilt);
  pose.a22 = u * std::cos(tilt);
  pose.tx = tip.x;
  pose.ty = tip.y;
  const LandmarkSet lm = apply_affine(pose, canonical_landmarks());

  const Point2 right_eye = mean_of(lm, 36, 41), left_eye = mean_of(lm, 42, 47);
  const Point2 right_brow = mean_of(lm, 17, 21), left_brow = mean_of(lm, 22, 26);
  const Point2 mouth = mean_of(lm, 48, 59);
  const Point2 bridge = 0.5 * (lm[27] + lm[33]);
  const Point2 face_centre = 0.5 * (lm[8] + 0.5 * (lm[0] + lm[16]));
  const double face_rx = 0.5 * distance(lm[0], lm[16]);
  const double face_ry = 0.5 * distance(lm[8], 0.5 * (lm[0] + lm[16])) + 0.45 * u;

  // Identity texture: an oriented grating over the nose bridge.
  const double theta = (identity * 37 % 180) * std::numbers::pi / 180.0;
  const double period = 0.24 * u + 0.03 * u * (identity % 3);
  const double phase = 0.9 * identity;
  const Point2 dir{std::cos(theta), std::sin(theta)};

  Image img(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Point2 p{static_cast<double>(x), static_cast<double>(y)};
      const double fx = (p.x - face_centre.x) / face_rx, fy = (p.y - face_centre.y) / face_ry;
      const double inside = 1.0 / (1.0 + std::exp(12.0 * (std::sqrt(fx * fx + fy * fy) - 1.0)));
      double g = 0.40 + 0.10 * inside;
      g -= 0.05 * (gaussian(p, right_eye, 0.09 * u, 0.04 * u) + gaussian(p, left_eye, 0.09 * u, 0.04 * u));
      g -= 0.04 * (gaussian(p, right_brow, 0.18 * u, 0.03 * u) + gaussian(p, left_brow, 0.18 * u, 0.03 * u));
      g -= 0.04 * gaussian(p, mouth, 0.2 * u, 0.05 * u);
      const double along = (p.x - bridge.x) * dir.x + (p.y - bridge.y) * dir.y;
      const double window = gaussian(p, bridge, 0.22 * u, 0.30 * u);
      g += 0.35 * window * std::sin(2.0 * std::numbers::pi * along / period + phase);
      g = std::clamp(g, 0.0, 1.0);
      const std::array<double, 3> tint = {1.0, 0.86, 0.74};
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = to_byte(static_cast<float>(g * tint[c])) / 255.0f;
    }
  }
  return {"id" + std::to_string(identity), std::move(img), lm};
}

std::string write_synthetic_corpus(const std::string& dir, int count, double threshold, int width,
                                   int height) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["threshold"] = threshold;
  manifest["identities"] = nlohmann::ordered_json::array();
  for (int i = 0; i < count; ++i) {
    const SyntheticFace face = make_synthetic_face(i, width, height);
    const std::string stem = face.label;
    save_png(face.image, (fs::path(dir) / (stem + ".png")).string());
    save_landmarks(face.landmarks, (fs::path(dir) / (stem + ".lms")).string());
    manifest["identities"].push_back({{"label", face.label}, {"images", {stem + ".png"}}});
  }
  const std::string path = (fs::path(dir) / "manifest.json").string();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << manifest.dump(2) << '\n';
  return path;
}

}  // namespace raf
