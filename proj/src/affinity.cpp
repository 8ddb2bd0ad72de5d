#include "uca/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace uca {

void ClusterParams::validate() const {
  if (gamma < 1) throw ConfigError("cluster gamma must be at least 1");
  if (connectivity != 4 && connectivity != 8) throw ConfigError("connectivity must be 4 or 8");
}

namespace {

Point2 mean_of(std::span<const Pixel> pixels) {
  double sx = 0.0, sy = 0.0;
  for (const Pixel& p : pixels) {
    sx += p.x;
    sy += p.y;
  }
  const double n = static_cast<double>(pixels.size());
  return {sx / n, sy / n};
}

}  // namespace

std::vector<PixelSet> cluster_foreground(const ScalarRaster& segmap, const ClusterParams& params) {
  params.validate();
  const int w = segmap.width(), h = segmap.height();
  static constexpr int kOffsets8[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                          {1, 0},   {-1, 1}, {0, 1},  {1, 1}};
  static constexpr int kOffsets4[4][2] = {{0, -1}, {-1, 0}, {1, 0}, {0, 1}};
  const std::span<const int[2]> offsets =
      params.connectivity == 8 ? std::span<const int[2]>(kOffsets8) : std::span<const int[2]>(kOffsets4);

  std::vector<char> visited(segmap.size(), 0);
  auto at = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

  struct Component {
    PixelSet pixels;
    Point2 centroid;
  };
  std::vector<Component> components;
  std::deque<Pixel> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (visited[at(x, y)] || segmap(x, y) <= 0.5) continue;
      PixelSet pixels;
      visited[at(x, y)] = 1;
      queue.push_back({x, y});
      while (!queue.empty()) {
        const Pixel p = queue.front();
        queue.pop_front();
        pixels.push_back(p);
        for (const auto& o : offsets) {
          const int nx = p.x + o[0], ny = p.y + o[1];
          if (!segmap.contains(nx, ny) || visited[at(nx, ny)] || segmap(nx, ny) <= 0.5) continue;
          visited[at(nx, ny)] = 1;
          queue.push_back({nx, ny});
        }
      }
      if (static_cast<int>(pixels.size()) < params.gamma) continue;
      std::sort(pixels.begin(), pixels.end(), [](const Pixel& a, const Pixel& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
      });
      const Point2 centroid = mean_of(pixels);
      components.push_back({std::move(pixels), centroid});
    }
  }
  std::stable_sort(components.begin(), components.end(), [](const Component& a, const Component& b) {
    return a.centroid.y != b.centroid.y ? a.centroid.y < b.centroid.y : a.centroid.x < b.centroid.x;
  });
  std::vector<PixelSet> out;
  out.reserve(components.size());
  for (Component& c : components) out.push_back(std::move(c.pixels));
  return out;
}

std::pair<Point2, Point2> split_centroids(std::span<const Pixel> pixels) {
  if (pixels.size() < 2) throw DegenerateClusterError("cluster needs at least two pixels");
  Pixel lo = pixels.front(), hi = pixels.front();
  for (const Pixel& p : pixels) {
    if (p.x < lo.x || (p.x == lo.x && p.y < lo.y)) lo = p;
    if (p.x > hi.x || (p.x == hi.x && p.y < hi.y)) hi = p;
  }
  if (lo.x == hi.x) throw DegenerateClusterError("cluster occupies a single column");

  PixelSet left, right;
  for (const Pixel& p : pixels) {
    const long dl = static_cast<long>(p.x - lo.x) * (p.x - lo.x) + static_cast<long>(p.y - lo.y) * (p.y - lo.y);
    const long dr = static_cast<long>(p.x - hi.x) * (p.x - hi.x) + static_cast<long>(p.y - hi.y) * (p.y - hi.y);
    (dl <= dr ? left : right).push_back(p);
  }
  Point2 c_left = mean_of(left);
  Point2 c_right = mean_of(right);
  if (c_left.x > c_right.x) std::swap(c_left, c_right);
  return {c_left, c_right};
}

std::vector<VertebraCluster> build_clusters(const ScalarRaster& segmap, const ClusterParams& params) {
  std::vector<VertebraCluster> out;
  for (PixelSet& pixels : cluster_foreground(segmap, params)) {
    try {
      auto [c_left, c_right] = split_centroids(pixels);
      if (distance(c_left, c_right) < 1e-6) continue;
      out.push_back({std::move(pixels), c_left, c_right});
    } catch (const DegenerateClusterError&) {
      continue;
    }
  }
  return out;
}

VectorRaster build_affinity_map(std::span<const VertebraCluster> clusters, int width, int height) {
  VectorRaster out(width, height, Vec2{});
  for (const VertebraCluster& c : clusters) {
    const double dx = c.c_right.x - c.c_left.x;
    const double dy = c.c_right.y - c.c_left.y;
    const double norm = std::hypot(dx, dy);
    if (norm < 1e-6) throw DegenerateClusterError("cluster centroids coincide");
    const Vec2 direction{dx / norm, dy / norm};
    for (const Pixel& p : c.pixels) {
      if (!out.contains(p.x, p.y)) throw InvariantError("cluster pixel outside raster");
      out(p.x, p.y) = direction;
    }
  }
  return out;
}

}  // namespace uca
