#include "uca/angle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace uca {

std::string_view to_string(RegionSpan span) {
  switch (span) {
    case RegionSpan::Thoracic:
      return "thoracic";
    case RegionSpan::Lumbar:
      return "lumbar";
    case RegionSpan::Spanning:
      break;
  }
  return "spanning";
}

RegionSpan parse_region_span(std::string_view text) {
  if (text == "thoracic") return RegionSpan::Thoracic;
  if (text == "lumbar") return RegionSpan::Lumbar;
  if (text == "spanning") return RegionSpan::Spanning;
  throw InputError("unknown region span '" + std::string(text) + "'");
}

double UcaResult::max_angle() const {
  double best = 0.0;
  for (const Curve& c : curves) best = std::max(best, c.angle_deg);
  return best;
}

double line_slope(Point2 left, Point2 right) {
  if (!(left.x < right.x)) throw InvariantError("line slope needs left.x < right.x");
  return std::atan2(right.y - left.y, right.x - left.x) * 180.0 / std::numbers::pi;
}

std::vector<std::size_t> find_extremal_lines(std::span<const double> slopes) {
  // Collapse plateaus to their first index.
  std::vector<std::size_t> runs;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    if (runs.empty() || slopes[i] != slopes[runs.back()]) runs.push_back(i);
  }
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (k == 0 || k + 1 == runs.size()) {
      out.push_back(runs[k]);
      continue;
    }
    const double prev = slopes[runs[k - 1]], cur = slopes[runs[k]], next = slopes[runs[k + 1]];
    if ((cur > prev && cur > next) || (cur < prev && cur < next)) out.push_back(runs[k]);
  }
  return out;
}

UcaResult compute_uca_from_slopes(std::span<const double> slopes, std::span<const Region> regions,
                                  double threshold_deg) {
  if (regions.size() != slopes.size()) throw InvariantError("one region label per slope required");
  UcaResult result;
  result.slopes.assign(slopes.begin(), slopes.end());
  if (slopes.size() < 2) return result;

  std::vector<std::size_t> extrema = find_extremal_lines(slopes);
  auto gap = [&](std::size_t k) { return std::abs(slopes[extrema[k]] - slopes[extrema[k + 1]]); };
  while (extrema.size() >= 2) {
    std::size_t weakest = 0;
    for (std::size_t k = 1; k + 1 < extrema.size(); ++k) {
      if (gap(k) < gap(weakest)) weakest = k;
    }
    if (gap(weakest) > threshold_deg) break;
    if (extrema.size() == 2) {
      extrema.clear();
    } else if (weakest == 0) {
      extrema.erase(extrema.begin());
    } else if (weakest + 2 == extrema.size()) {
      extrema.pop_back();
    } else {
      extrema.erase(extrema.begin() + static_cast<std::ptrdiff_t>(weakest),
                    extrema.begin() + static_cast<std::ptrdiff_t>(weakest) + 2);
    }
  }

  for (std::size_t k = 0; k + 1 < extrema.size(); ++k) {
    const std::size_t upper = extrema[k], lower = extrema[k + 1];
    RegionSpan span = RegionSpan::Spanning;
    if (regions[upper] == regions[lower]) {
      span = regions[upper] == Region::Thoracic ? RegionSpan::Thoracic : RegionSpan::Lumbar;
    }
    result.curves.push_back({upper, lower, std::abs(slopes[upper] - slopes[lower]), span});
  }
  return result;
}

UcaResult compute_uca(std::span<const VertebraLine> lines, double threshold_deg) {
  std::vector<double> slopes;
  std::vector<Region> regions;
  slopes.reserve(lines.size());
  regions.reserve(lines.size());
  for (const VertebraLine& line : lines) {
    slopes.push_back(line_slope(line.left.position, line.right.position));
    regions.push_back(line.left.region);
  }
  return compute_uca_from_slopes(slopes, regions, threshold_deg);
}

}  // namespace uca
