#include "uca/pseudomask.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace uca {

DilationKernel::DilationKernel(int size) : size_(size) {
  if (size < 1 || size % 2 == 0) {
    throw ConfigError("dilation kernel size must be odd and positive, got " + std::to_string(size));
  }
}

namespace {

int round_coord(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace

ScalarRaster rasterize_segment(const LineSegment& seg, int width, int height) {
  ScalarRaster out(width, height, 0.0);
  int x0 = round_coord(seg.left.x), y0 = round_coord(seg.left.y);
  const int x1 = round_coord(seg.right.x), y1 = round_coord(seg.right.y);
  if (!out.contains(x0, y0) || !out.contains(x1, y1)) {
    throw InvariantError("segment endpoint outside raster");
  }
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    out(x0, y0) = 1.0;
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return out;
}

// Separable: a square window max equals a row pass followed by a column pass.
ScalarRaster dilate(const ScalarRaster& mask, const DilationKernel& kernel) {
  const int r = kernel.radius();
  const int w = mask.width(), h = mask.height();
  ScalarRaster rows(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool hit = false;
      for (int qx = std::max(0, x - r); qx <= std::min(w - 1, x + r) && !hit; ++qx) {
        hit = mask(qx, y) > 0.5;
      }
      rows(x, y) = hit ? 1.0 : 0.0;
    }
  }
  if (r == 0) return rows;
  ScalarRaster out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool hit = false;
      for (int qy = std::max(0, y - r); qy <= std::min(h - 1, y + r) && !hit; ++qy) {
        hit = rows(x, qy) > 0.5;
      }
      out(x, y) = hit ? 1.0 : 0.0;
    }
  }
  return out;
}

ScalarRaster build_pseudo_mask(std::span<const LineSegment> lines, const DilationKernel& kernel,
                               int width, int height) {
  ScalarRaster out(width, height, 0.0);
  for (const LineSegment& seg : lines) {
    const ScalarRaster dilated = dilate(rasterize_segment(seg, width, height), kernel);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (dilated.values()[i] > 0.5) out.values()[i] = 1.0;
    }
  }
  return out;
}

}  // namespace uca
