#pragma once

#include <span>

#include "uca/raster.hpp"

namespace uca {

/// Square k x k structuring element, k odd.
class DilationKernel {
 public:
  explicit DilationKernel(int size = 3);
  int size() const { return size_; }
  int radius() const { return size_ / 2; }

 private:
  int size_;
};

/// 8-connected Bresenham discretisation of the segment between the rounded
/// endpoints. A zero-length segment sets a single pixel.
ScalarRaster rasterize_segment(const LineSegment& seg, int width, int height);

/// Binary dilation; the window is clipped at the image border.
ScalarRaster dilate(const ScalarRaster& mask, const DilationKernel& kernel);

/// Union of the dilated rasterisations of every segment.
ScalarRaster build_pseudo_mask(std::span<const LineSegment> lines, const DilationKernel& kernel,
                               int width, int height);

}  // namespace uca
