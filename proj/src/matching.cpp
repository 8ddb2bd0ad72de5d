#include "uca/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "uca/angle.hpp"

namespace uca {

void MatchParams::validate() const {
  if (num_samples < 2) throw ConfigError("num_samples must be at least 2");
  if (!(drop_ratio >= 0.0 && drop_ratio <= 1.0)) throw ConfigError("drop_ratio must lie in [0,1]");
  if (!std::isfinite(max_pair_distance)) throw ConfigError("max_pair_distance must be finite");
}

double MatchParams::effective_max_distance(int image_width) const {
  return max_pair_distance > 0.0 ? max_pair_distance : 0.5 * image_width;
}

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  values_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw InvariantError("ragged cost matrix");
    values_.insert(values_.end(), row.begin(), row.end());
  }
}

double line_integral_confidence(const VectorRaster& affinity, Point2 from, Point2 to,
                                int num_samples) {
  if (num_samples < 2) throw InvariantError("line integral needs at least two samples");
  const double dx = to.x - from.x, dy = to.y - from.y;
  const double length = std::hypot(dx, dy);
  if (!(length > 0.0)) throw InvariantError("line integral endpoints coincide");
  const double ex = dx / length, ey = dy / length;
  const double max_x = affinity.width() - 1.0, max_y = affinity.height() - 1.0;
  double sum = 0.0;
  for (int k = 0; k < num_samples; ++k) {
    const double u = (k + 0.5) / num_samples;
    const Point2 p{std::clamp((1.0 - u) * from.x + u * to.x, 0.0, max_x),
                   std::clamp((1.0 - u) * from.y + u * to.y, 0.0, max_y)};
    const Vec2 a = bilinear_sample(affinity, p);
    sum += a.x * ex + a.y * ey;
  }
  return sum / num_samples;
}

Assignment hungarian_assign(const CostMatrix& cost, bool maximize) {
  if (cost.empty()) return {};
  for (std::size_t i = 0; i < cost.rows(); ++i) {
    for (std::size_t j = 0; j < cost.cols(); ++j) {
      if (!std::isfinite(cost(i, j))) throw InvariantError("assignment costs must be finite");
    }
  }
  // The solver below needs rows <= cols; solve the transpose otherwise.
  const bool transposed = cost.rows() > cost.cols();
  const std::size_t n = transposed ? cost.cols() : cost.rows();
  const std::size_t m = transposed ? cost.rows() : cost.cols();
  auto a = [&](std::size_t i, std::size_t j) {
    const double c = transposed ? cost(j - 1, i - 1) : cost(i - 1, j - 1);
    return maximize ? -c : c;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials u (rows), v (cols); p[j] is the row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.reserve(n);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    if (transposed) {
      out.emplace_back(j - 1, p[j] - 1);
    } else {
      out.emplace_back(p[j] - 1, j - 1);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double assignment_total(const CostMatrix& cost, const Assignment& assignment) {
  double total = 0.0;
  for (const auto& [i, j] : assignment) total += cost(i, j);
  return total;
}

CostMatrix confidence_matrix(std::span<const Landmark> left, std::span<const Landmark> right,
                             const VectorRaster& affinity, const MatchParams& params) {
  params.validate();
  const double max_distance = params.effective_max_distance(affinity.width());
  CostMatrix c(left.size(), right.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < left.size(); ++i) {
    for (std::size_t j = 0; j < right.size(); ++j) {
      const Point2 a = left[i].position, b = right[j].position;
      if (b.x <= a.x || distance(a, b) > max_distance) continue;
      c(i, j) = line_integral_confidence(affinity, a, b, params.num_samples);
    }
  }
  return c;
}

std::vector<std::size_t> filter_matches(std::span<const double> confidences, double drop_ratio) {
  std::vector<std::size_t> keep;
  if (confidences.empty()) return keep;
  const double mean =
      std::accumulate(confidences.begin(), confidences.end(), 0.0) / static_cast<double>(confidences.size());
  for (std::size_t k = 0; k < confidences.size(); ++k) {
    if (!(confidences[k] < drop_ratio * mean)) keep.push_back(k);
  }
  return keep;
}

std::vector<VertebraLine> match_candidates(std::span<const Landmark> left,
                                           std::span<const Landmark> right,
                                           const VectorRaster& affinity, const MatchParams& params) {
  if (left.empty() || right.empty()) return {};
  const CostMatrix confidence = confidence_matrix(left, right, affinity, params);

  // Excluded pairs get a penalty larger than any achievable finite total, so
  // they are only chosen when a row or column has nothing else; they are then
  // removed below.
  double max_abs = 0.0;
  for (std::size_t i = 0; i < confidence.rows(); ++i) {
    for (std::size_t j = 0; j < confidence.cols(); ++j) {
      if (std::isfinite(confidence(i, j))) max_abs = std::max(max_abs, std::abs(confidence(i, j)));
    }
  }
  const double penalty = -(1.0 + 2.0 * static_cast<double>(std::max(left.size(), right.size()))) *
                         std::max(max_abs, 1e-9);
  CostMatrix scores = confidence;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    for (std::size_t j = 0; j < scores.cols(); ++j) {
      if (!std::isfinite(scores(i, j))) scores(i, j) = penalty;
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> valid;
  std::vector<double> valid_confidence;
  for (const auto& [i, j] : hungarian_assign(scores, /*maximize=*/true)) {
    if (!std::isfinite(confidence(i, j))) continue;
    valid.emplace_back(i, j);
    valid_confidence.push_back(confidence(i, j));
  }

  std::vector<VertebraLine> lines;
  for (std::size_t k : filter_matches(valid_confidence, params.drop_ratio)) {
    const auto [i, j] = valid[k];
    VertebraLine line{left[i], right[j], valid_confidence[k], 0.0};
    line.slope_deg = line_slope(line.left.position, line.right.position);
    lines.push_back(line);
  }
  std::stable_sort(lines.begin(), lines.end(), [](const VertebraLine& a, const VertebraLine& b) {
    return a.midpoint().y < b.midpoint().y;
  });
  return lines;
}

}  // namespace uca
