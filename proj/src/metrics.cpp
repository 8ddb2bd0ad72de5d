#include "uca/metrics.hpp"

#include <cmath>

#include "uca/matching.hpp"

namespace uca {

void EdeParams::validate() const {
  if (!(s > 0.0)) throw ConfigError("EDE scale s must be positive");
  if (!(pixel_spacing > 0.0)) throw ConfigError("pixel_spacing must be positive");
  if (!(correct_threshold_mm > 0.0)) throw ConfigError("correct_threshold_mm must be positive");
}

double LineEvalReport::mean_ede() const {
  if (per_line_ede.empty()) return 0.0;
  double sum = 0.0;
  for (double e : per_line_ede) sum += e;
  return sum / static_cast<double>(per_line_ede.size());
}

double endpoint_distance_error(double d_left, double d_right, double s) {
  return (std::exp(-d_left / s) + std::exp(-d_right / s)) / 2.0;
}

double endpoint_distance_error(const VertebraLine& pred, const LineSegment& gt, const EdeParams& params) {
  return endpoint_distance_error(distance(pred.left.position, gt.left),
                                 distance(pred.right.position, gt.right), params.s);
}

LineEvalReport evaluate_lines(std::span<const VertebraLine> preds, std::span<const LineSegment> gts,
                              const EdeParams& params) {
  params.validate();
  LineEvalReport report;
  report.num_pred = preds.size();
  report.num_gt = gts.size();
  if (preds.empty() || gts.empty()) {
    // 0 correct over a non-empty side is 0; a ratio over an empty side is vacuously 1.
    report.average_precision = preds.empty() ? 1.0 : 0.0;
    report.average_recall = gts.empty() ? 1.0 : 0.0;
    return report;
  }

  CostMatrix ede(preds.size(), gts.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) {
      ede(i, j) = endpoint_distance_error(preds[i], gts[j], params);
    }
  }
  const double limit = params.threshold_px();
  for (const auto& [i, j] : hungarian_assign(ede, /*maximize=*/true)) {
    report.matched_pairs.emplace_back(i, j);
    report.per_line_ede.push_back(ede(i, j));
    if (distance(preds[i].left.position, gts[j].left) < limit &&
        distance(preds[i].right.position, gts[j].right) < limit) {
      ++report.correct;
    }
  }
  report.average_precision = static_cast<double>(report.correct) / static_cast<double>(preds.size());
  report.average_recall = static_cast<double>(report.correct) / static_cast<double>(gts.size());
  return report;
}

double dice_overlap(const ScalarRaster& pred, const ScalarRaster& gt) {
  if (!pred.same_shape(gt)) throw InputError("dice_overlap: mask dimensions differ");
  std::size_t a = 0, b = 0, both = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred.values()[i] > 0.5, g = gt.values()[i] > 0.5;
    a += p;
    b += g;
    both += p && g;
  }
  if (a + b == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

AgreementReport angle_agreement(std::span<const double> pred, std::span<const double> ref) {
  if (pred.size() != ref.size()) throw InvariantError("angle_agreement: lists differ in length");
  if (pred.size() < 2) throw InvariantError("angle_agreement: regression needs at least two pairs");
  const double n = static_cast<double>(pred.size());

  double mean_pred = 0.0, mean_ref = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mean_pred += pred[i];
    mean_ref += ref[i];
  }
  mean_pred /= n;
  mean_ref /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dx = ref[i] - mean_ref, dy = pred[i] - mean_pred;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InvariantError("angle_agreement: reference angles are constant");

  AgreementReport r;
  r.count = pred.size();
  r.slope = sxy / sxx;
  r.intercept = mean_pred - r.slope * mean_ref;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - (r.intercept + r.slope * ref[i]);
    ss_res += e * e;
  }
  r.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;

  double sum_d = 0.0;
  std::size_t within = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - ref[i];
    sum_d += d;
    if (std::abs(d) <= 5.0) ++within;
  }
  r.mean_diff = sum_d / n;
  double ss_d = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - ref[i] - r.mean_diff;
    ss_d += d * d;
  }
  r.sd_diff = std::sqrt(ss_d / (n - 1.0));
  r.loa_low = r.mean_diff - 1.96 * r.sd_diff;
  r.loa_high = r.mean_diff + 1.96 * r.sd_diff;
  r.within_5deg_fraction = static_cast<double>(within) / n;
  return r;
}

}  // namespace uca
