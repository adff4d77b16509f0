#include <algorithm>
#include <cmath>

#include "raf/oracle.hpp"

namespace raf {
namespace {

// Row k holds the weight of every source pixel in output cell k: overlap of pixel
// [j, j+1) with the cell [k*n/m, (k+1)*n/m), divided by the cell width.
std::vector<std::vector<double>> area_weights(int n, int m) {
  std::vector<std::vector<double>> w(m, std::vector<double>(n, 0.0));
  const double cell = static_cast<double>(n) / m;
  for (int k = 0; k < m; ++k) {
    const double lo = k * cell, hi = (k + 1) * cell;
    const int j0 = static_cast<int>(std::floor(lo));
    const int j1 = std::min(n - 1, static_cast<int>(std::ceil(hi)));
    for (int j = j0; j <= j1; ++j) {
      const double overlap = std::min(hi, j + 1.0) - std::max(lo, static_cast<double>(j));
      if (overlap > 0) w[k][j] = overlap / cell;
    }
  }
  return w;
}

double gray_at(const Image& img, int x, int y) {
  if (img.channels() == 1) return img.at(x, y);
  return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
}

Embedding centre_and_normalise(Embedding v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double& x : v) {
    x -= mean;
    ss += x * x;
  }
  const double n = std::sqrt(ss);
  if (n < 1e-12) {
    std::fill(v.begin(), v.end(), 0.0);
  } else {
    for (double& x : v) x /= n;
  }
  return v;
}

}  // namespace

Embedding extract_embedding(const Image& img) {
  const int w = img.width(), h = img.height();
  constexpr int m = kEmbeddingSide;
  const auto wx = area_weights(w, m);
  const auto wy = area_weights(h, m);

  // Separable: horizontal pass per source row, then vertical pass per output row.
  std::vector<double> rows(static_cast<std::size_t>(h) * m, 0.0);
#pragma omp parallel for
  for (int y = 0; y < h; ++y) {
    for (int k = 0; k < m; ++k) {
      double acc = 0.0;
      for (int x = 0; x < w; ++x) {
        if (wx[k][x] != 0.0) acc += wx[k][x] * gray_at(img, x, y);
      }
      rows[static_cast<std::size_t>(y) * m + k] = acc;
    }
  }
  Embedding out(kEmbeddingDim, 0.0);
#pragma omp parallel for
  for (int r = 0; r < m; ++r) {
    for (int k = 0; k < m; ++k) {
      double acc = 0.0;
      for (int y = 0; y < h; ++y) {
        if (wy[r][y] != 0.0) acc += wy[r][y] * rows[static_cast<std::size_t>(y) * m + k];
      }
      out[static_cast<std::size_t>(r) * m + k] = acc;
    }
  }
  return centre_and_normalise(std::move(out));
}

namespace serial {

Embedding extract_embedding(const Image& img) {
  const int w = img.width(), h = img.height();
  constexpr int m = kEmbeddingSide;
  const double cw = static_cast<double>(w) / m, ch = static_cast<double>(h) / m;
  Embedding out(kEmbeddingDim, 0.0);
  for (int r = 0; r < m; ++r) {
    for (int k = 0; k < m; ++k) {
      const double x_lo = k * cw, x_hi = (k + 1) * cw;
      const double y_lo = r * ch, y_hi = (r + 1) * ch;
      double acc = 0.0;
      for (int y = 0; y < h; ++y) {
        const double oy = std::min(y_hi, y + 1.0) - std::max(y_lo, static_cast<double>(y));
        if (oy <= 0) continue;
        for (int x = 0; x < w; ++x) {
          const double ox = std::min(x_hi, x + 1.0) - std::max(x_lo, static_cast<double>(x));
          if (ox <= 0) continue;
          acc += ox * oy * gray_at(img, x, y);
        }
      }
      out[static_cast<std::size_t>(r) * m + k] = acc / (cw * ch);
    }
  }
  return centre_and_normalise(std::move(out));
}

}  // namespace serial
}  // namespace raf
