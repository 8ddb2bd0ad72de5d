#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "uca/raster.hpp"

namespace uca {

enum class RegionSpan { Thoracic, Lumbar, Spanning };

std::string_view to_string(RegionSpan span);
RegionSpan parse_region_span(std::string_view text);

struct Curve {
  std::size_t upper = 0;  ///< index of the upper contributing line
  std::size_t lower = 0;  ///< index of the lower contributing line
  double angle_deg = 0.0;
  RegionSpan span = RegionSpan::Thoracic;
};

struct UcaResult {
  std::vector<Curve> curves;
  std::vector<double> slopes;

  /// Largest curve angle, or 0 when no curve was reported.
  double max_angle() const;
};

inline constexpr double kDefaultCurveThresholdDeg = 10.0;

/// Inclination of the line from `left` to `right` in degrees, in (-90, 90).
/// Positive when the right endpoint sits lower in the image.
/// Throws InvariantError unless left.x < right.x.
double line_slope(Point2 left, Point2 right);

/// Indices of strict local extrema of `slopes`. Runs of equal values count as
/// one element reported at their first index; the first and last elements are
/// always included.
std::vector<std::size_t> find_extremal_lines(std::span<const double> slopes);

/// Curve angles from lines ordered top-to-bottom.
///
/// The extremal lines form an alternating sequence of tilt peaks and valleys.
/// Neighbouring extrema whose tilt difference does not exceed `threshold_deg`
/// are removed smallest-first (an end element is dropped on its own, an
/// interior pair together), so small wiggles never split a curve. Every
/// consecutive pair left over is one curve, its angle the absolute tilt
/// difference, which then always exceeds the threshold.
UcaResult compute_uca(std::span<const VertebraLine> lines,
                      double threshold_deg = kDefaultCurveThresholdDeg);

/// Same as compute_uca for slopes and regions given directly.
UcaResult compute_uca_from_slopes(std::span<const double> slopes, std::span<const Region> regions,
                                  double threshold_deg = kDefaultCurveThresholdDeg);

}  // namespace uca
