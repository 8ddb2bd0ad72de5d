#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "uca/errors.hpp"

namespace uca {

// Image frame: x grows rightward, y grows downward, origin at the centre of the
// top-left pixel. Every angle in the library is measured in this frame.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

double distance(Point2 a, Point2 b);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

enum class Side { Left, Right };
enum class Region { Thoracic, Lumbar };

std::string_view to_string(Side side);
std::string_view to_string(Region region);
Side parse_side(std::string_view text);
Region parse_region(std::string_view text);

/// Row-major 2-D grid. Width and height are at least 1.
template <typename T>
class Raster {
 public:
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw InvariantError("raster dimensions must be at least 1x1");
    }
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  Raster(int width, int height, std::vector<T> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (width < 1 || height < 1) {
      throw InvariantError("raster dimensions must be at least 1x1");
    }
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw InvariantError("raster value count does not match width x height");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool contains(Point2 p) const {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= width_ - 1 && p.y <= height_ - 1;
  }

  T& operator()(int x, int y) { return values_[index(x, y)]; }
  const T& operator()(int x, int y) const { return values_[index(x, y)]; }

  const std::vector<T>& values() const { return values_; }
  std::vector<T>& values() { return values_; }

  bool same_shape(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<T> values_;
};

using ScalarRaster = Raster<double>;
using VectorRaster = Raster<Vec2>;

struct Landmark {
  Point2 position;
  Side side = Side::Left;
  Region region = Region::Thoracic;
  double confidence = 0.0;
};

/// Ground-truth vertebra line; canonical orientation keeps left.x <= right.x.
struct LineSegment {
  Point2 left;
  Point2 right;
  Region region = Region::Thoracic;
};

/// A matched left/right landmark pair.
struct VertebraLine {
  Landmark left;
  Landmark right;
  double confidence = 0.0;
  double slope_deg = 0.0;

  Point2 midpoint() const { return 0.5 * (left.position + right.position); }
};

/// Bilinear interpolation. Integer grid points return the stored value exactly.
/// Throws InvariantError when p lies outside [0, w-1] x [0, h-1].
double bilinear_sample(const ScalarRaster& raster, Point2 p);
Vec2 bilinear_sample(const VectorRaster& raster, Point2 p);

/// Number of values strictly above 0.5.
std::size_t foreground_count(const ScalarRaster& mask);

}  // namespace uca
