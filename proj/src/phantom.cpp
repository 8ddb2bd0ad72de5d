#include "uca/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "uca/pseudomask.hpp"

namespace uca {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

enum Stream : std::uint32_t { kCurveStream = 1, kDropoutStream = 2, kNoiseStream = 3, kSpeckleStream = 4 };

PhantomSpec resolve_curve(const PhantomSpec& spec) {
  if (!spec.random_curve) return spec;
  const CurveRandomization& r = *spec.random_curve;
  std::mt19937_64 rng = make_rng(spec.seed, kCurveStream);
  std::uniform_int_distribution<int> count(r.min_components, r.max_components);
  std::uniform_real_distribution<double> wavelength(r.min_wavelength, r.max_wavelength);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::uniform_real_distribution<double> magnitude(0.3, 1.0);
  std::bernoulli_distribution negative(0.5);
  std::uniform_real_distribution<double> tilt(r.min_tilt_deg, r.max_tilt_deg);

  PhantomSpec out = spec;
  out.random_curve.reset();
  out.curve.clear();
  const int k = count(rng);
  for (int i = 0; i < k; ++i) {
    SineComponent c;
    c.wavelength = wavelength(rng);
    c.phase = phase(rng);
    c.amplitude = magnitude(rng) * (negative(rng) ? -1.0 : 1.0);
    out.curve.push_back(c);
  }
  const double target_tilt = tilt(rng);

  auto max_over_centres = [&](auto&& f) {
    double m = 0.0;
    for (int i = 0; i < out.num_vertebrae; ++i) m = std::max(m, std::abs(f(vertebra_center_y(out, i))));
    return m;
  };
  const double max_gradient = max_over_centres([&](double y) { return centerline_slope(out, y); });
  if (max_gradient < 1e-12) return out;
  const double scale = std::tan(target_tilt * std::numbers::pi / 180.0) / max_gradient;
  for (SineComponent& c : out.curve) c.amplitude *= scale;

  // Keep every endpoint three kernel widths inside the lateral borders.
  const double cx = 0.5 * (out.width - 1);
  const double allowed = cx - out.vertebra_half_width - 3.0 * out.heatmap_sigma - 1.0;
  const double excursion = max_over_centres([&](double y) { return centerline_x(out, y) - cx; });
  if (allowed > 0.0 && excursion > allowed) {
    for (SineComponent& c : out.curve) c.amplitude *= allowed / excursion;
  }
  return out;
}

}  // namespace

void PhantomSpec::validate() const {
  if (width < 1 || height < 1) throw ConfigError("phantom raster must be at least 1x1");
  if (num_vertebrae < 2) throw ConfigError("phantom needs at least two vertebrae");
  if (!(vertebra_half_width >= 2.0)) throw ConfigError("vertebra_half_width must be at least 2 px");
  if (thoracic_count < 0 || thoracic_count > num_vertebrae) {
    throw ConfigError("thoracic_count must lie in [0, num_vertebrae]");
  }
  if (!(heatmap_sigma > 0.0)) throw ConfigError("heatmap_sigma must be positive");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("noise_sigma must be >= 0");
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) throw ConfigError("dropout_prob must lie in [0,1)");
  for (const SineComponent& c : curve) {
    if (!(c.wavelength > 0.0) || !std::isfinite(c.amplitude) || !std::isfinite(c.phase)) {
      throw ConfigError("curve components need finite amplitude/phase and positive wavelength");
    }
  }
  if (random_curve) {
    const CurveRandomization& r = *random_curve;
    if (r.min_components < 1 || r.max_components < r.min_components) {
      throw ConfigError("random_curve component range is invalid");
    }
    if (!(r.min_tilt_deg >= 0.0 && r.max_tilt_deg >= r.min_tilt_deg && r.max_tilt_deg < 60.0)) {
      throw ConfigError("random_curve tilt range is invalid");
    }
    if (!(r.min_wavelength > 0.0 && r.max_wavelength >= r.min_wavelength)) {
      throw ConfigError("random_curve wavelength range is invalid");
    }
  }
}

double centerline_x(const PhantomSpec& spec, double y) {
  double x = 0.5 * (spec.width - 1);
  for (const SineComponent& c : spec.curve) x += c.amplitude * std::sin(kTwoPi * y / c.wavelength + c.phase);
  return x;
}

double centerline_slope(const PhantomSpec& spec, double y) {
  double d = 0.0;
  for (const SineComponent& c : spec.curve) {
    d += c.amplitude * (kTwoPi / c.wavelength) * std::cos(kTwoPi * y / c.wavelength + c.phase);
  }
  return d;
}

double vertebra_center_y(const PhantomSpec& spec, int index) {
  return (index + 1) * static_cast<double>(spec.height) / (spec.num_vertebrae + 1);
}

std::vector<LineSegment> phantom_lines(const PhantomSpec& spec) {
  spec.validate();
  std::vector<LineSegment> lines;
  lines.reserve(static_cast<std::size_t>(spec.num_vertebrae));
  const double hw = spec.vertebra_half_width;
  for (int i = 0; i < spec.num_vertebrae; ++i) {
    const double y = vertebra_center_y(spec, i);
    const double x = centerline_x(spec, y);
    if (x - hw < 0.0 || x + hw > spec.width - 1) {
      throw ConfigError("centerline comes closer than vertebra_half_width to a lateral border at vertebra " +
                        std::to_string(i));
    }
    // The line is perpendicular to the centerline, so its slope is minus the
    // centerline's tilt from vertical.
    const double tilt = std::atan(centerline_slope(spec, y));
    const Point2 along{std::cos(tilt), -std::sin(tilt)};
    LineSegment seg{{x - hw * along.x, y - hw * along.y},
                    {x + hw * along.x, y + hw * along.y},
                    i < spec.thoracic_count ? Region::Thoracic : Region::Lumbar};
    for (const Point2& p : {seg.left, seg.right}) {
      if (p.x < 0.0 || p.y < 0.0 || p.x > spec.width - 1 || p.y > spec.height - 1) {
        throw ConfigError("vertebra " + std::to_string(i) + " endpoint falls outside the raster");
      }
    }
    lines.push_back(seg);
  }
  return lines;
}

std::vector<VertebraLine> as_vertebra_lines(std::span<const LineSegment> lines) {
  std::vector<VertebraLine> out;
  out.reserve(lines.size());
  for (const LineSegment& seg : lines) {
    VertebraLine line{{seg.left, Side::Left, seg.region, 1.0}, {seg.right, Side::Right, seg.region, 1.0}, 1.0, 0.0};
    line.slope_deg = line_slope(seg.left, seg.right);
    out.push_back(line);
  }
  return out;
}

PhantomCase render_phantom(std::span<const LineSegment> lines, const PhantomSpec& spec) {
  spec.validate();
  const int w = spec.width, h = spec.height;

  std::mt19937_64 dropout_rng = make_rng(spec.seed, kDropoutStream);
  std::bernoulli_distribution drop(spec.dropout_prob);
  std::array<std::vector<Point2>, 4> points;
  std::vector<Landmark> rendered;
  for (const LineSegment& seg : lines) {
    for (Side side : {Side::Left, Side::Right}) {
      const bool dropped = spec.dropout_prob > 0.0 && drop(dropout_rng);
      if (dropped) continue;
      const Point2 p = side == Side::Left ? seg.left : seg.right;
      points[HeatmapStack::index(seg.region, side)].push_back(p);
      rendered.push_back({p, side, seg.region, 1.0});
    }
  }

  std::mt19937_64 noise_rng = make_rng(spec.seed, kNoiseStream);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
  auto render = [&](std::size_t c) {
    ScalarRaster channel = render_gaussian_channel(points[c], spec.heatmap_sigma, w, h);
    if (spec.noise_sigma > 0.0) {
      for (double& v : channel.values()) v = std::clamp(v + noise(noise_rng), 0.0, 1.0);
    }
    return channel;
  };
  // Channels are rendered in order so the noise stream is consumed deterministically.
  ScalarRaster c0 = render(0), c1 = render(1), c2 = render(2), c3 = render(3);

  ScalarRaster segmap = build_pseudo_mask(lines, DilationKernel(kPhantomMaskKernel), w, h);
  if (spec.noise_sigma > 0.0) {
    // Isolated single-pixel speckles, far enough from every vertebra that they
    // stay separate components smaller than any sensible gamma.
    std::mt19937_64 speckle_rng = make_rng(spec.seed, kSpeckleStream);
    std::uniform_int_distribution<int> px(0, w - 1), py(0, h - 1);
    const int target = static_cast<int>(std::lround(spec.noise_sigma * 100.0));
    const ScalarRaster clean = segmap;
    for (int placed = 0, attempts = 0; placed < target && attempts < 100 * (target + 1); ++attempts) {
      const int x = px(speckle_rng), y = py(speckle_rng);
      bool clear = true;
      for (int qy = std::max(0, y - 3); qy <= std::min(h - 1, y + 3) && clear; ++qy) {
        for (int qx = std::max(0, x - 3); qx <= std::min(w - 1, x + 3) && clear; ++qx) {
          clear = clean(qx, qy) <= 0.5 && segmap(qx, qy) <= 0.5;
        }
      }
      if (!clear) continue;
      segmap(x, y) = 1.0;
      ++placed;
    }
  }

  PhantomCase out{spec,
                  HeatmapStack{{std::move(c0), std::move(c1), std::move(c2), std::move(c3)}},
                  std::move(segmap),
                  std::vector<LineSegment>(lines.begin(), lines.end()),
                  {},
                  kPhantomPixelSpacingMm,
                  std::move(rendered)};
  const std::vector<VertebraLine> gt = as_vertebra_lines(out.gt_lines);
  out.gt_uca = compute_uca(gt);
  return out;
}

PhantomCase generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const PhantomSpec resolved = resolve_curve(spec);
  const std::vector<LineSegment> lines = phantom_lines(resolved);
  return render_phantom(lines, resolved);
}

UcaResult oracle_uca(const PhantomCase& phantom, double threshold_deg) {
  if (phantom.gt_lines.empty()) throw InvariantError("oracle_uca needs ground-truth lines");
  const std::vector<VertebraLine> gt = as_vertebra_lines(phantom.gt_lines);
  return compute_uca(gt, threshold_deg);
}

}  // namespace uca
