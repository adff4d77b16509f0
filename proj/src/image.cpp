#include "raf/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "raf/error.hpp"

namespace raf {

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0) throw InvalidInput("image dimensions must be positive");
  if (channels != 1 && channels != 3) throw InvalidInput("image must have 1 or 3 channels");
  samples_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<float> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
  if (width <= 0 || height <= 0) throw InvalidInput("image dimensions must be positive");
  if (channels != 1 && channels != 3) throw InvalidInput("image must have 1 or 3 channels");
  if (samples_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw InvalidInput("sample count does not match image dimensions");
  }
  for (float v : samples_) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw InvalidInput("image samples must be finite and within [0, 1]");
    }
  }
}

std::uint8_t to_byte(float v) {
  const double scaled = std::floor(static_cast<double>(v) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width());
  png.height = static_cast<png_uint_32>(img.height());
  png.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

  std::vector<std::uint8_t> raw(img.samples().size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = to_byte(img.samples()[i]);

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, raw.data(), 0, nullptr)) {
    throw IoError(std::string("png encode failed: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, raw.data(), 0, nullptr)) {
    throw IoError(std::string("png encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw IoError(std::string("png decode failed: ") + png.message);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, raw.data(), 0, nullptr)) {
    png_image_free(&png);
    throw IoError(std::string("png decode failed: ") + png.message);
  }
  std::vector<float> samples(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) samples[i] = raw[i] / 255.0f;
  return Image(static_cast<int>(png.width), static_cast<int>(png.height), color ? 3 : 1,
               std::move(samples));
}

Image load_png(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void save_png(const Image& img, const std::string& path) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace raf
