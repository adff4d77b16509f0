#pragma once

#include <string>
#include <vector>

#include "raf/image.hpp"
#include "raf/landmarks.hpp"

namespace raf {

/// Procedurally drawn face with exact landmarks, used as test and demo fixtures.
struct SyntheticFace {
  std::string label;
  Image image;  ///< 3-channel, samples quantised to k/255
  LandmarkSet landmarks;
};

/// Deterministic face for identity index `identity`. Identities differ in pose jitter
/// and in the orientation and period of a textured patch over the nose bridge.
SyntheticFace make_synthetic_face(int identity, int width = 128, int height = 128);

/// Writes <label>.png and <label>.lms for `count` identities plus manifest.json
/// enrolling each from its own image. Returns the manifest path.
std::string write_synthetic_corpus(const std::string& dir, int count, double threshold,
                                   int width = 128, int height = 128);

}  // namespace raf
