#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "uca/raster.hpp"

namespace uca {

/// Channel order is fixed: thoracic-left, thoracic-right, lumbar-left, lumbar-right.
struct HeatmapStack {
  std::array<ScalarRaster, 4> channels;

  static constexpr std::size_t index(Region region, Side side) {
    return (region == Region::Lumbar ? 2 : 0) + (side == Side::Right ? 1 : 0);
  }
  static constexpr Region region_of(std::size_t channel) {
    return channel < 2 ? Region::Thoracic : Region::Lumbar;
  }
  static constexpr Side side_of(std::size_t channel) {
    return channel % 2 == 0 ? Side::Left : Side::Right;
  }

  const ScalarRaster& channel(Region region, Side side) const { return channels[index(region, side)]; }
  ScalarRaster& channel(Region region, Side side) { return channels[index(region, side)]; }

  int width() const { return channels[0].width(); }
  int height() const { return channels[0].height(); }

  /// Throws InputError unless all channels share dimensions and values lie in [0,1].
  void validate() const;
};

/// How the integer peak location is refined to sub-pixel precision.
enum class PeakRefinement {
  /// Least-squares fit of a Gaussian of known sigma to the log-values of a 5x5 window.
  GaussianFit,
  /// Value-weighted centroid of the 3x3 window.
  Centroid3x3,
};

struct PeakParams {
  double sigma = 4.0;
  double peak_threshold = 0.3;
  int nms_radius = 5;
  PeakRefinement refinement = PeakRefinement::GaussianFit;

  void validate() const;
};

/// Unnormalised Gaussian kernels combined by max, so every peak is 1 and
/// overlaps never exceed 1. Contributions below 1e-12 are not evaluated.
ScalarRaster render_gaussian_channel(std::span<const Point2> points, double sigma, int width,
                                     int height);

/// Non-maximum suppression over a Chebyshev window of `nms_radius`. A pixel
/// survives when it reaches the threshold and beats every neighbour, where
/// equal values are ordered by (y, x). Confidence is the peak value.
std::vector<Landmark> extract_peaks(const ScalarRaster& channel, const PeakParams& params, Side side,
                                    Region region);

/// Peaks of all four channels, thoracic before lumbar, left before right.
std::vector<Landmark> extract_all_peaks(const HeatmapStack& stack, const PeakParams& params);

std::string_view channel_name(std::size_t channel);

/// Four 16-bit PNGs plus `heatmaps.json` listing the channel order.
void save_heatmap_stack(const HeatmapStack& stack, const std::filesystem::path& dir);
HeatmapStack load_heatmap_stack(const std::filesystem::path& manifest);

}  // namespace uca
