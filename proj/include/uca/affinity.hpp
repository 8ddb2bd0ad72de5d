#pragma once

#include <span>
#include <utility>
#include <vector>

#include "uca/raster.hpp"

namespace uca {

struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

using PixelSet = std::vector<Pixel>;

struct ClusterParams {
  int gamma = 10;        ///< minimum component size; smaller components are noise
  int connectivity = 8;  ///< 4 or 8

  void validate() const;
};

struct VertebraCluster {
  PixelSet pixels;
  Point2 c_left;
  Point2 c_right;
};

/// Connected components of the foreground (values > 0.5). Components with
/// fewer than `gamma` pixels are discarded. Output is ordered by centroid y,
/// then centroid x; pixels inside a component are in row-major order.
std::vector<PixelSet> cluster_foreground(const ScalarRaster& segmap, const ClusterParams& params);

/// Splits a cluster between its leftmost and rightmost pixels (ties on x go to
/// the smaller y) by nearest Euclidean distance, equidistant pixels going
/// left, and returns the mean of each half ordered by x.
/// Throws DegenerateClusterError when the pixels occupy a single column.
std::pair<Point2, Point2> split_centroids(std::span<const Pixel> pixels);

/// Clusters with their left/right centroids. Degenerate clusters (single
/// column or coincident centroids) cannot carry a direction and are skipped.
std::vector<VertebraCluster> build_clusters(const ScalarRaster& segmap, const ClusterParams& params);

/// Unit vector from c_left to c_right on every pixel of each cluster, zero
/// elsewhere. Throws DegenerateClusterError for centroids closer than 1e-6 px.
VectorRaster build_affinity_map(std::span<const VertebraCluster> clusters, int width, int height);

}  // namespace uca
