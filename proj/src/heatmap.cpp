#include "uca/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <nlohmann/json.hpp>

#include "uca/raster_io.hpp"

namespace uca {

namespace fs = std::filesystem;

void HeatmapStack::validate() const {
  for (const ScalarRaster& c : channels) {
    if (!c.same_shape(channels[0])) throw InputError("heatmap channels differ in dimensions");
    for (double v : c.values()) {
      if (!(v >= 0.0 && v <= 1.0)) throw InputError("heatmap value outside [0,1]");
    }
  }
}

void PeakParams::validate() const {
  if (!(sigma > 0.0)) throw ConfigError("peak sigma must be positive");
  if (nms_radius < 1) throw ConfigError("nms_radius must be at least 1");
  if (!(peak_threshold > 0.0 && peak_threshold < 1.0)) {
    throw ConfigError("peak_threshold must lie in (0,1)");
  }
}

ScalarRaster render_gaussian_channel(std::span<const Point2> points, double sigma, int width,
                                     int height) {
  if (!(sigma > 0.0)) throw InvariantError("Gaussian sigma must be positive");
  ScalarRaster out(width, height, 0.0);
  // exp(-r^2 / 2 sigma^2) < 1e-12 beyond this radius.
  const double cutoff = sigma * std::sqrt(2.0 * std::log(1e12));
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  for (const Point2& p : points) {
    if (!out.contains(p)) throw InvariantError("Gaussian centre outside raster");
    const int x0 = std::max(0, static_cast<int>(std::floor(p.x - cutoff)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(p.x + cutoff)));
    const int y0 = std::max(0, static_cast<int>(std::floor(p.y - cutoff)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(p.y + cutoff)));
    for (int y = y0; y <= y1; ++y) {
      const double dy = y - p.y;
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - p.x;
        const double v = std::exp(-(dx * dx + dy * dy) * inv_two_var);
        out(x, y) = std::max(out(x, y), v);
      }
    }
  }
  return out;
}

namespace {

// Strict total order on pixels: higher value wins, equal values go to the
// smaller (y, x).
bool dominates(double v, int x, int y, double w, int qx, int qy) {
  if (v != w) return v > w;
  return y != qy ? y < qy : x < qx;
}

bool is_peak(const ScalarRaster& channel, int x, int y, int radius) {
  const double v = channel(x, y);
  for (int qy = std::max(0, y - radius); qy <= std::min(channel.height() - 1, y + radius); ++qy) {
    for (int qx = std::max(0, x - radius); qx <= std::min(channel.width() - 1, x + radius); ++qx) {
      if (qx == x && qy == y) continue;
      if (!dominates(v, x, y, channel(qx, qy), qx, qy)) return false;
    }
  }
  return true;
}

Point2 centroid_3x3(const ScalarRaster& channel, int x, int y) {
  double sum = 0.0, sx = 0.0, sy = 0.0;
  for (int qy = std::max(0, y - 1); qy <= std::min(channel.height() - 1, y + 1); ++qy) {
    for (int qx = std::max(0, x - 1); qx <= std::min(channel.width() - 1, x + 1); ++qx) {
      const double w = std::max(0.0, channel(qx, qy));
      sum += w;
      sx += w * qx;
      sy += w * qy;
    }
  }
  if (sum <= 0.0) return {static_cast<double>(x), static_cast<double>(y)};
  return {sx / sum, sy / sum};
}

// log v = C - |q - c|^2 / (2 sigma^2). With sigma known the quadratic term moves
// to the left-hand side and the offset falls out of a 3-parameter linear fit.
std::optional<Point2> gaussian_fit(const ScalarRaster& channel, int x, int y, double sigma) {
  constexpr int kRadius = 2;
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  // Normal equations for [C, bx, by].
  double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0, sz = 0, sxz = 0, syz = 0;
  for (int qy = std::max(0, y - kRadius); qy <= std::min(channel.height() - 1, y + kRadius); ++qy) {
    for (int qx = std::max(0, x - kRadius); qx <= std::min(channel.width() - 1, x + kRadius); ++qx) {
      const double v = channel(qx, qy);
      if (v <= 1e-6) continue;
      const double kx = qx - x, ky = qy - y;
      const double z = std::log(v) + (kx * kx + ky * ky) * inv_two_var;
      n += 1;
      sx += kx;
      sy += ky;
      sxx += kx * kx;
      syy += ky * ky;
      sxy += kx * ky;
      sz += z;
      sxz += kx * z;
      syz += ky * z;
    }
  }
  if (n < 3) return std::nullopt;
  // Solve the symmetric 3x3 system by Cramer's rule.
  const double a[3][3] = {{n, sx, sy}, {sx, sxx, sxy}, {sy, sxy, syy}};
  const double rhs[3] = {sz, sxz, syz};
  auto det3 = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double det = det3(a);
  if (std::abs(det) < 1e-12) return std::nullopt;
  double mx[3][3], my[3][3];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      mx[r][c] = c == 1 ? rhs[r] : a[r][c];
      my[r][c] = c == 2 ? rhs[r] : a[r][c];
    }
  }
  const double dx = det3(mx) / det * sigma * sigma;
  const double dy = det3(my) / det * sigma * sigma;
  if (!std::isfinite(dx) || !std::isfinite(dy) || std::abs(dx) > 1.0 || std::abs(dy) > 1.0) {
    return std::nullopt;
  }
  return Point2{x + dx, y + dy};
}

}  // namespace

std::vector<Landmark> extract_peaks(const ScalarRaster& channel, const PeakParams& params, Side side,
                                    Region region) {
  params.validate();
  std::vector<Landmark> out;
  for (int y = 0; y < channel.height(); ++y) {
    for (int x = 0; x < channel.width(); ++x) {
      const double v = channel(x, y);
      if (v < params.peak_threshold || !is_peak(channel, x, y, params.nms_radius)) continue;
      Point2 position;
      std::optional<Point2> fitted;
      if (params.refinement == PeakRefinement::GaussianFit) {
        fitted = gaussian_fit(channel, x, y, params.sigma);
      }
      position = fitted ? *fitted : centroid_3x3(channel, x, y);
      position.x = std::clamp(position.x, 0.0, channel.width() - 1.0);
      position.y = std::clamp(position.y, 0.0, channel.height() - 1.0);
      out.push_back(Landmark{position, side, region, std::clamp(v, 0.0, 1.0)});
    }
  }
  return out;
}

std::vector<Landmark> extract_all_peaks(const HeatmapStack& stack, const PeakParams& params) {
  std::vector<Landmark> all;
  for (std::size_t c = 0; c < stack.channels.size(); ++c) {
    auto peaks = extract_peaks(stack.channels[c], params, HeatmapStack::side_of(c),
                               HeatmapStack::region_of(c));
    all.insert(all.end(), peaks.begin(), peaks.end());
  }
  return all;
}

std::string_view channel_name(std::size_t channel) {
  static constexpr std::string_view kNames[4] = {"thoracic_left", "thoracic_right", "lumbar_left",
                                                 "lumbar_right"};
  return kNames[channel];
}

void save_heatmap_stack(const HeatmapStack& stack, const fs::path& dir) {
  nlohmann::json channels = nlohmann::json::array();
  for (std::size_t c = 0; c < 4; ++c) {
    const std::string file = "heatmap_" + std::string(channel_name(c)) + ".png";
    save_scalar_raster(stack.channels[c], dir / file);
    channels.push_back({{"name", channel_name(c)},
                        {"region", to_string(HeatmapStack::region_of(c))},
                        {"side", to_string(HeatmapStack::side_of(c))},
                        {"file", file}});
  }
  nlohmann::json doc = {{"schema", 1},
                        {"width", stack.width()},
                        {"height", stack.height()},
                        {"channels", channels}};
  write_file_atomically(dir / "heatmaps.json", doc.dump(2) + "\n");
}

HeatmapStack load_heatmap_stack(const fs::path& manifest) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + manifest.string() + "': " + e.what());
  }
  std::array<std::optional<ScalarRaster>, 4> slots;
  try {
    for (const auto& entry : doc.at("channels")) {
      const Region region = parse_region(entry.at("region").get<std::string>());
      const Side side = parse_side(entry.at("side").get<std::string>());
      const std::size_t c = HeatmapStack::index(region, side);
      slots[c] = load_scalar_raster(manifest.parent_path() / entry.at("file").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + manifest.string() + "': " + e.what());
  }
  for (std::size_t c = 0; c < 4; ++c) {
    if (!slots[c]) throw InputError("heatmap manifest is missing channel " + std::string(channel_name(c)));
  }
  HeatmapStack stack{{*slots[0], *slots[1], *slots[2], *slots[3]}};
  stack.validate();
  return stack;
}

}  // namespace uca
