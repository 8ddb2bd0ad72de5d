#include "uca/raster.hpp"

#include <cmath>
#include <string>

namespace uca {

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

std::string_view to_string(Region region) {
  return region == Region::Thoracic ? "thoracic" : "lumbar";
}

Side parse_side(std::string_view text) {
  if (text == "left") return Side::Left;
  if (text == "right") return Side::Right;
  throw InputError("unknown side '" + std::string(text) + "'");
}

Region parse_region(std::string_view text) {
  if (text == "thoracic") return Region::Thoracic;
  if (text == "lumbar") return Region::Lumbar;
  throw InputError("unknown region '" + std::string(text) + "'");
}

namespace {

struct Stencil {
  int x0, y0, x1, y1;
  double fx, fy;
};

template <typename T>
Stencil make_stencil(const Raster<T>& raster, Point2 p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !raster.contains(p)) {
    throw InvariantError("bilinear sample point outside raster bounds");
  }
  Stencil s{};
  s.x0 = static_cast<int>(std::floor(p.x));
  s.y0 = static_cast<int>(std::floor(p.y));
  s.x1 = std::min(s.x0 + 1, raster.width() - 1);
  s.y1 = std::min(s.y0 + 1, raster.height() - 1);
  s.fx = p.x - s.x0;
  s.fy = p.y - s.y0;
  return s;
}

}  // namespace

double bilinear_sample(const ScalarRaster& raster, Point2 p) {
  const Stencil s = make_stencil(raster, p);
  const double top = (1.0 - s.fx) * raster(s.x0, s.y0) + s.fx * raster(s.x1, s.y0);
  const double bottom = (1.0 - s.fx) * raster(s.x0, s.y1) + s.fx * raster(s.x1, s.y1);
  return (1.0 - s.fy) * top + s.fy * bottom;
}

Vec2 bilinear_sample(const VectorRaster& raster, Point2 p) {
  const Stencil s = make_stencil(raster, p);
  const Vec2 a = raster(s.x0, s.y0), b = raster(s.x1, s.y0);
  const Vec2 c = raster(s.x0, s.y1), d = raster(s.x1, s.y1);
  const double w00 = (1.0 - s.fx) * (1.0 - s.fy), w10 = s.fx * (1.0 - s.fy);
  const double w01 = (1.0 - s.fx) * s.fy, w11 = s.fx * s.fy;
  return {w00 * a.x + w10 * b.x + w01 * c.x + w11 * d.x,
          w00 * a.y + w10 * b.y + w01 * c.y + w11 * d.y};
}

std::size_t foreground_count(const ScalarRaster& mask) {
  std::size_t n = 0;
  for (double v : mask.values()) {
    if (v > 0.5) ++n;
  }
  return n;
}

}  // namespace uca
