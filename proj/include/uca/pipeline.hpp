#pragma once

#include <vector>

#include "uca/affinity.hpp"
#include "uca/angle.hpp"
#include "uca/heatmap.hpp"
#include "uca/matching.hpp"
#include "uca/metrics.hpp"

namespace uca {

/// Every tunable of the detection pipeline and its evaluation.
struct PipelineConfig {
  PeakParams peak;
  ClusterParams cluster;
  int kernel_size = 3;  ///< pseudo-mask dilation kernel
  MatchParams match;
  double angle_threshold_deg = kDefaultCurveThresholdDeg;
  EdeParams ede;

  void validate() const;
};

struct RegionMatch {
  Region region = Region::Thoracic;
  std::vector<Landmark> left;
  std::vector<Landmark> right;
  CostMatrix confidence;
};

struct PipelineResult {
  std::vector<Landmark> landmarks;
  std::vector<VertebraCluster> clusters;
  VectorRaster affinity{1, 1};
  std::vector<RegionMatch> matches;  ///< thoracic then lumbar
  std::vector<VertebraLine> lines;   ///< top-to-bottom
  UcaResult uca;
};

/// peaks -> clusters -> affinity map -> per-region matching -> curve angles.
/// Throws InputError when the heatmaps and segmentation map differ in size.
PipelineResult run_pipeline(const HeatmapStack& heatmaps, const ScalarRaster& segmap,
                            const PipelineConfig& config);

}  // namespace uca
