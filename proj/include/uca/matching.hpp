#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "uca/raster.hpp"

namespace uca {

struct PairConfidence {
  std::size_t left_index = 0;
  std::size_t right_index = 0;
  double confidence = 0.0;
};

struct MatchParams {
  int num_samples = 20;
  double drop_ratio = 0.5;
  /// Pairs farther apart are never matched. Non-positive means half the image width.
  double max_pair_distance = 0.0;

  void validate() const;
  double effective_max_distance(int image_width) const;
};

/// Row-major I x J matrix.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  CostMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

using Assignment = std::vector<std::pair<std::size_t, std::size_t>>;

/// Midpoint-rule line integral of the affinity field projected on the unit
/// direction from `from` to `to`. Samples outside the raster are clamped to
/// the border. Throws InvariantError for coincident endpoints.
double line_integral_confidence(const VectorRaster& affinity, Point2 from, Point2 to,
                                int num_samples);

/// Globally optimal linear assignment (Kuhn-Munkres with potentials, O(n^3)).
/// Rectangular matrices are padded internally; min(I, J) pairs are returned
/// sorted by row.
Assignment hungarian_assign(const CostMatrix& cost, bool maximize);

double assignment_total(const CostMatrix& cost, const Assignment& assignment);

/// Full confidence matrix between left and right candidates. Excluded pairs
/// (right not strictly right of left, or too far apart) hold -infinity.
CostMatrix confidence_matrix(std::span<const Landmark> left, std::span<const Landmark> right,
                             const VectorRaster& affinity, const MatchParams& params);

/// Scores every pair, solves the maximising assignment, then discards matches
/// below drop_ratio times the mean matched confidence. Lines come back sorted
/// top-to-bottom by midpoint y.
std::vector<VertebraLine> match_candidates(std::span<const Landmark> left,
                                           std::span<const Landmark> right,
                                           const VectorRaster& affinity, const MatchParams& params);

/// Confidence filter applied after assignment; returns the surviving positions.
std::vector<std::size_t> filter_matches(std::span<const double> confidences, double drop_ratio);

}  // namespace uca
