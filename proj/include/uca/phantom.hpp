#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "uca/angle.hpp"
#include "uca/heatmap.hpp"
#include "uca/raster.hpp"

namespace uca {

/// x(y) += amplitude * sin(2 pi y / wavelength + phase)
struct SineComponent {
  double amplitude = 0.0;   ///< pixels
  double wavelength = 1.0;  ///< pixels
  double phase = 0.0;       ///< radians
};

/// When present, the centerline is drawn from the seed instead of taken from
/// PhantomSpec::curve. The largest tilt over the vertebra centres is scaled to
/// a value drawn uniformly from [min_tilt_deg, max_tilt_deg] and then reduced
/// further if the spine would leave the lateral margin.
struct CurveRandomization {
  int min_components = 1;
  int max_components = 3;
  double min_tilt_deg = 5.0;
  double max_tilt_deg = 25.0;
  double min_wavelength = 250.0;
  double max_wavelength = 1200.0;
};

struct PhantomSpec {
  int width = 256;
  int height = 512;
  int num_vertebrae = 17;
  std::vector<SineComponent> curve;
  std::optional<CurveRandomization> random_curve;
  double vertebra_half_width = 24.0;
  int thoracic_count = 12;
  double heatmap_sigma = 4.0;
  double noise_sigma = 0.0;
  double dropout_prob = 0.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError for invalid fields. Geometry is checked in generate_phantom.
  void validate() const;
};

inline constexpr double kPhantomPixelSpacingMm = 0.5;
inline constexpr int kPhantomMaskKernel = 3;

struct PhantomCase {
  PhantomSpec spec;  ///< with the curve resolved
  HeatmapStack heatmaps;
  ScalarRaster segmap;
  std::vector<LineSegment> gt_lines;  ///< top-to-bottom
  UcaResult gt_uca;
  double pixel_spacing = kPhantomPixelSpacingMm;
  std::vector<Landmark> rendered_landmarks;  ///< landmarks that survived dropout
};

double centerline_x(const PhantomSpec& spec, double y);
double centerline_slope(const PhantomSpec& spec, double y);  ///< dx/dy
double vertebra_center_y(const PhantomSpec& spec, int index);

/// Vertebra lines perpendicular to the centerline at equally spaced centres.
/// Throws ConfigError if any endpoint leaves the raster or the centerline
/// comes closer than vertebra_half_width to a lateral border.
std::vector<LineSegment> phantom_lines(const PhantomSpec& spec);

/// Deterministic for a given spec (including its seed).
PhantomCase generate_phantom(const PhantomSpec& spec);

/// Renders heatmaps and mask for explicit ground-truth lines, applying the
/// spec's sigma, noise and dropout with its seed.
PhantomCase render_phantom(std::span<const LineSegment> lines, const PhantomSpec& spec);

/// compute_uca on the ground-truth lines.
UcaResult oracle_uca(const PhantomCase& phantom, double threshold_deg = kDefaultCurveThresholdDeg);

/// Ground-truth lines as unit-confidence VertebraLines.
std::vector<VertebraLine> as_vertebra_lines(std::span<const LineSegment> lines);

}  // namespace uca
