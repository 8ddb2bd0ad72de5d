#include "uca/pipeline.hpp"

#include <algorithm>

#include "uca/pseudomask.hpp"

namespace uca {

void PipelineConfig::validate() const {
  peak.validate();
  cluster.validate();
  DilationKernel{kernel_size};
  match.validate();
  if (!(angle_threshold_deg >= 0.0 && angle_threshold_deg < 180.0)) {
    throw ConfigError("angle_threshold_deg must lie in [0,180)");
  }
  ede.validate();
}

PipelineResult run_pipeline(const HeatmapStack& heatmaps, const ScalarRaster& segmap,
                            const PipelineConfig& config) {
  config.validate();
  heatmaps.validate();
  if (heatmaps.width() != segmap.width() || heatmaps.height() != segmap.height()) {
    throw InputError("heatmaps and segmentation map differ in dimensions");
  }

  PipelineResult result;
  result.landmarks = extract_all_peaks(heatmaps, config.peak);
  result.clusters = build_clusters(segmap, config.cluster);
  result.affinity = build_affinity_map(result.clusters, segmap.width(), segmap.height());

  for (Region region : {Region::Thoracic, Region::Lumbar}) {
    RegionMatch match;
    match.region = region;
    for (const Landmark& l : result.landmarks) {
      if (l.region != region) continue;
      (l.side == Side::Left ? match.left : match.right).push_back(l);
    }
    match.confidence = confidence_matrix(match.left, match.right, result.affinity, config.match);
    const auto lines = match_candidates(match.left, match.right, result.affinity, config.match);
    result.lines.insert(result.lines.end(), lines.begin(), lines.end());
    result.matches.push_back(std::move(match));
  }
  std::stable_sort(result.lines.begin(), result.lines.end(),
                   [](const VertebraLine& a, const VertebraLine& b) { return a.midpoint().y < b.midpoint().y; });
  result.uca = compute_uca(result.lines, config.angle_threshold_deg);
  return result;
}

}  // namespace uca
