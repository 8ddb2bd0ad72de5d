#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "uca/raster.hpp"

namespace uca {

struct EdeParams {
  double s = 100.0;                    ///< scale factor, pixels
  double pixel_spacing = 0.5;          ///< mm per pixel
  double correct_threshold_mm = 3.5;   ///< both endpoints closer than this -> correct

  void validate() const;
  double threshold_px() const { return correct_threshold_mm / pixel_spacing; }
};

struct LineEvalReport {
  std::vector<double> per_line_ede;  ///< one per matched pair, in matched_pairs order
  double average_precision = 0.0;
  double average_recall = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> matched_pairs;  ///< (pred, gt)
  std::size_t correct = 0;
  std::size_t num_pred = 0;
  std::size_t num_gt = 0;

  double mean_ede() const;
};

struct AgreementReport {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double mean_diff = 0.0;
  double sd_diff = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
  double within_5deg_fraction = 0.0;
  std::size_t count = 0;
};

/// Mean of exp(-d/s) over the left and right endpoint distances.
double endpoint_distance_error(const VertebraLine& pred, const LineSegment& gt, const EdeParams& params);
double endpoint_distance_error(double d_left, double d_right, double s);

/// Pairs predictions with ground truth by EDE-maximising assignment and counts
/// a pair as correct when both endpoint distances are below the mm threshold.
/// AP is over predictions, AR over ground truth. When a side is empty its
/// ratio is vacuously 1 and the other side's is 0 (both empty: AP = AR = 1).
LineEvalReport evaluate_lines(std::span<const VertebraLine> preds, std::span<const LineSegment> gts,
                              const EdeParams& params);

/// 2|A n B| / (|A| + |B|) on foreground (> 0.5); 1 when both are empty.
double dice_overlap(const ScalarRaster& pred, const ScalarRaster& gt);

/// OLS of pred on ref plus Bland-Altman statistics of pred - ref. Limits of
/// agreement are mean +/- 1.96 sample SD. Throws InvariantError for mismatched
/// lengths, fewer than two pairs or constant reference angles.
AgreementReport angle_agreement(std::span<const double> pred_angles, std::span<const double> ref_angles);

}  // namespace uca
