// End-to-end acceptance checks. One PASS/FAIL line per criterion; the exit
// status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "uca/affinity.hpp"
#include "uca/matching.hpp"
#include "uca/metrics.hpp"
#include "uca/phantom.hpp"
#include "uca/pipeline.hpp"
#include "uca/pseudomask.hpp"

namespace fs = std::filesystem;
using namespace uca;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <typename... Args>
std::string fmtn(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PhantomSpec random_spec(std::uint64_t seed) {
  PhantomSpec s;
  s.random_curve = CurveRandomization{};
  s.seed = seed;
  return s;
}

// ---------------------------------------------------------------------------

Outcome noise_free_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  const PipelineConfig config;
  double min_ap = 1.0, min_ar = 1.0, max_err = 0.0;
  for (std::uint64_t seed = 1000; seed < 1050; ++seed) {
    const PhantomCase c = generate_phantom(random_spec(seed));
    const PipelineResult r = run_pipeline(c.heatmaps, c.segmap, config);
    const LineEvalReport rep = evaluate_lines(r.lines, c.gt_lines, config.ede);
    min_ap = std::min(min_ap, rep.average_precision);
    min_ar = std::min(min_ar, rep.average_recall);
    max_err = std::max(max_err, std::abs(r.uca.max_angle() - oracle_uca(c).max_angle()));
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {min_ap == 1.0 && min_ar == 1.0 && max_err <= 1.0 && seconds < 10.0,
          fmtn("min AP %.4f, min AR %.4f, max |UCA-oracle| %.4f deg (<= 1.0), %.2f s (< 10)", min_ap, min_ar,
               max_err, seconds)};
}

Outcome noisy_end_to_end() {
  const PipelineConfig config;
  std::vector<double> aps, ars, errs;
  for (std::uint64_t seed = 2000; seed < 2050; ++seed) {
    PhantomSpec s = random_spec(seed);
    s.noise_sigma = 0.05;
    s.dropout_prob = 0.1;
    const PhantomCase c = generate_phantom(s);
    const PipelineResult r = run_pipeline(c.heatmaps, c.segmap, config);
    const LineEvalReport rep = evaluate_lines(r.lines, c.gt_lines, config.ede);
    aps.push_back(rep.average_precision);
    ars.push_back(rep.average_recall);
    const UcaResult oracle = oracle_uca(c);
    if (!r.uca.curves.empty() && !oracle.curves.empty()) {
      errs.push_back(std::abs(r.uca.max_angle() - oracle.max_angle()));
    }
  }
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  const double ap = mean(aps), ar = mean(ars), err = mean(errs);
  return {ar >= 0.85 && ap >= 0.95 && !errs.empty() && err <= 3.0,
          fmtn("mean AR %.4f (>= 0.85), mean AP %.4f (>= 0.95), mean |UCA-oracle| %.4f deg over %zu cases (<= 3.0)",
               ar, ap, err, errs.size())};
}

double brute_force_best(const CostMatrix& c, bool maximize) {
  const bool transposed = c.rows() > c.cols();
  const std::size_t n = transposed ? c.cols() : c.rows();
  const std::size_t m = transposed ? c.rows() : c.cols();
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  double best = maximize ? -INFINITY : INFINITY;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += transposed ? c(perm[i], i) : c(i, perm[i]);
    best = maximize ? std::max(best, total) : std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Outcome assignment_oracle() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 7), value(-50, 50);
  int mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    CostMatrix c(static_cast<std::size_t>(dim(rng)), static_cast<std::size_t>(dim(rng)));
    for (std::size_t i = 0; i < c.rows(); ++i) {
      for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) = value(rng);
    }
    const bool maximize = t % 2 == 1;
    const Assignment a = hungarian_assign(c, maximize);
    std::set<std::size_t> rows, cols;
    for (const auto& [i, j] : a) {
      rows.insert(i);
      cols.insert(j);
    }
    const bool valid = a.size() == std::min(c.rows(), c.cols()) && rows.size() == a.size() && cols.size() == a.size();
    if (!valid || assignment_total(c, a) != brute_force_best(c, maximize)) ++mismatches;
  }
  return {mismatches == 0, fmtn("%d/200 matrices differ from permutation enumeration", mismatches)};
}

std::vector<PixelSet> flood_fill(const ScalarRaster& m, int connectivity, int gamma) {
  std::vector<char> seen(static_cast<std::size_t>(m.width() * m.height()), 0);
  std::vector<PixelSet> out;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m(x, y) <= 0.5 || seen[static_cast<std::size_t>(y * m.width() + x)]) continue;
      PixelSet comp;
      std::vector<Pixel> stack{{x, y}};
      seen[static_cast<std::size_t>(y * m.width() + x)] = 1;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        comp.push_back(p);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dx == 0 && dy == 0) || (connectivity == 4 && dx != 0 && dy != 0)) continue;
            const int qx = p.x + dx, qy = p.y + dy;
            if (!m.contains(qx, qy) || m(qx, qy) <= 0.5) continue;
            char& s = seen[static_cast<std::size_t>(qy * m.width() + qx)];
            if (!s) {
              s = 1;
              stack.push_back({qx, qy});
            }
          }
        }
      }
      if (static_cast<int>(comp.size()) >= gamma) {
        std::sort(comp.begin(), comp.end(), [](Pixel a, Pixel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
        out.push_back(comp);
      }
    }
  }
  return out;
}

ScalarRaster random_mask(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> density(0.05, 0.6), u(0.0, 1.0);
  ScalarRaster m(dim(rng), dim(rng));
  const double d = density(rng);
  for (double& v : m.values()) v = u(rng) < d ? 1.0 : 0.0;
  return m;
}

Outcome clustering_oracle() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> gamma(1, 12);
  int mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const ScalarRaster m = random_mask(rng);
    for (int connectivity : {4, 8}) {
      const int g = gamma(rng);
      std::vector<PixelSet> got = cluster_foreground(m, {g, connectivity});
      std::vector<PixelSet> want = flood_fill(m, connectivity, g);
      auto key = [](const PixelSet& a, const PixelSet& b) { return a.front().y != b.front().y ? a.front().y < b.front().y : a.front().x < b.front().x; };
      std::sort(got.begin(), got.end(), key);
      std::sort(want.begin(), want.end(), key);
      if (got != want) ++mismatches;
    }
  }
  return {mismatches == 0, fmtn("%d/400 raster/connectivity runs differ from flood fill", mismatches)};
}

Outcome dilation_oracle() {
  std::mt19937_64 rng(13);
  int mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    const ScalarRaster m = random_mask(rng);
    for (int k : {1, 3, 5}) {
      const ScalarRaster got = dilate(m, DilationKernel(k));
      const int r = k / 2;
      ScalarRaster want(m.width(), m.height());
      for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
          for (int qy = y - r; qy <= y + r; ++qy) {
            for (int qx = x - r; qx <= x + r; ++qx) {
              if (m.contains(qx, qy) && m(qx, qy) > 0.5) want(x, y) = 1.0;
            }
          }
        }
      }
      if (!(got == want)) ++mismatches;
    }
  }
  return {mismatches == 0, fmtn("%d/300 mask/kernel runs differ from window scan", mismatches)};
}

Outcome ede_anchors() {
  const double zero = endpoint_distance_error(0.0, 0.0, 100.0);
  const double d = 100.0 * std::numbers::ln2;
  const double half = endpoint_distance_error(d, d, 100.0);
  return {zero == 1.0 && std::abs(half - 0.5) <= 1e-9,
          fmtn("EDE(0,0) = %.17g (== 1), EDE(100 ln2, 100 ln2) - 0.5 = %.3g (<= 1e-9)", zero, half - 0.5)};
}

Outcome line_integral_exactness() {
  double worst_parallel = 0.0, worst_orthogonal = 0.0;
  const std::vector<std::pair<Point2, Point2>> segments = {
      {{3, 7}, {40, 7}}, {{5, 5}, {40, 30}}, {{50, 10}, {12, 44}}, {{20, 3}, {21, 60}}, {{1.3, 2.7}, {55.1, 9.9}}};
  for (const auto& [a, b] : segments) {
    const double len = distance(a, b);
    const Vec2 e{(b.x - a.x) / len, (b.y - a.y) / len};
    const VectorRaster parallel(64, 64, e), orthogonal(64, 64, Vec2{-e.y, e.x});
    for (int n = 2; n <= 64; ++n) {
      worst_parallel = std::max(worst_parallel, std::abs(line_integral_confidence(parallel, a, b, n) - 1.0));
      worst_orthogonal = std::max(worst_orthogonal, std::abs(line_integral_confidence(orthogonal, a, b, n)));
    }
  }
  return {worst_parallel <= 1e-9 && worst_orthogonal <= 1e-9,
          fmtn("max |L-1| parallel %.3g, max |L| orthogonal %.3g (<= 1e-9, n = 2..64)", worst_parallel,
               worst_orthogonal)};
}

PhantomSpec invariance_spec() {
  PhantomSpec s;
  s.width = 448;
  s.height = 512;
  s.curve = {{18.0, 700.0, 0.4}, {6.0, 300.0, 1.1}};
  return s;
}

Outcome geometry_invariances() {
  const PipelineConfig config;
  const PhantomSpec spec = invariance_spec();
  const std::vector<LineSegment> base_lines = phantom_lines(spec);
  const PipelineResult base = run_pipeline(render_phantom(base_lines, spec).heatmaps,
                                           render_phantom(base_lines, spec).segmap, config);
  const double cx = 0.5 * (spec.width - 1), cy = 0.5 * (spec.height - 1);

  bool pass = base.lines.size() == base_lines.size() && !base.uca.curves.empty();
  double worst_slope = 0.0, worst_angle = 0.0;
  for (double phi : {-15.0, -5.0, 5.0, 15.0}) {
    const double t = phi * std::numbers::pi / 180.0;
    auto rotate = [&](Point2 p) {
      const double dx = p.x - cx, dy = p.y - cy;
      return Point2{cx + std::cos(t) * dx - std::sin(t) * dy, cy + std::sin(t) * dx + std::cos(t) * dy};
    };
    std::vector<LineSegment> lines = base_lines;
    for (LineSegment& l : lines) {
      l.left = rotate(l.left);
      l.right = rotate(l.right);
    }
    const PhantomCase c = render_phantom(lines, spec);
    const PipelineResult r = run_pipeline(c.heatmaps, c.segmap, config);
    if (r.lines.size() != base.lines.size() || r.uca.curves.size() != base.uca.curves.size()) {
      pass = false;
      continue;
    }
    for (std::size_t k = 0; k < r.lines.size(); ++k) {
      worst_slope = std::max(worst_slope, std::abs(r.lines[k].slope_deg - base.lines[k].slope_deg - phi));
    }
    for (std::size_t k = 0; k < r.uca.curves.size(); ++k) {
      worst_angle = std::max(worst_angle, std::abs(r.uca.curves[k].angle_deg - base.uca.curves[k].angle_deg));
    }
  }

  std::vector<LineSegment> mirrored = base_lines;
  for (LineSegment& l : mirrored) {
    const Point2 left = l.left, right = l.right;
    l.left = {spec.width - 1 - right.x, right.y};
    l.right = {spec.width - 1 - left.x, left.y};
  }
  const PhantomCase mc = render_phantom(mirrored, spec);
  const PipelineResult m = run_pipeline(mc.heatmaps, mc.segmap, config);
  double worst_mirror = m.uca.curves.size() == base.uca.curves.size() ? 0.0 : INFINITY;
  if (std::isfinite(worst_mirror)) {
    for (std::size_t k = 0; k < m.uca.curves.size(); ++k) {
      worst_mirror = std::max(worst_mirror, std::abs(m.uca.curves[k].angle_deg - base.uca.curves[k].angle_deg));
    }
  }
  pass = pass && worst_slope <= 0.2 && worst_angle <= 0.2 && worst_mirror <= 1e-9;
  return {pass, fmtn("rotation: max slope shift error %.4f deg (<= 0.2), max curve change %.4f deg (<= 0.2); "
                     "mirror: max curve change %.3g deg (<= 1e-9)",
                     worst_slope, worst_angle, worst_mirror)};
}

Outcome affinity_normalization() {
  std::size_t nonzero = 0, bad = 0;
  for (std::uint64_t seed = 3000; seed < 3020; ++seed) {
    PhantomSpec s = random_spec(seed);
    s.noise_sigma = seed % 2 ? 0.05 : 0.0;
    const PhantomCase c = generate_phantom(s);
    const std::vector<VertebraCluster> clusters = build_clusters(c.segmap, {});
    const VectorRaster a = build_affinity_map(clusters, c.segmap.width(), c.segmap.height());
    for (const Vec2& v : a.values()) {
      if (v.x == 0.0 && v.y == 0.0) continue;
      ++nonzero;
      if (std::abs(std::hypot(v.x, v.y) - 1.0) > 1e-9) ++bad;
    }
  }
  return {nonzero > 0 && bad == 0, fmtn("%zu of %zu non-zero vectors off unit norm by > 1e-9", bad, nonzero)};
}

Outcome agreement_statistics() {
  const std::vector<double> ref = {8.0, 12.5, 17.0, 22.3, 31.0, 40.2, 15.5, 27.8};
  std::vector<double> pred;
  for (double r : ref) pred.push_back(r + 2.0);
  const AgreementReport a = angle_agreement(pred, ref);
  const bool pass = std::abs(a.slope - 1.0) <= 1e-9 && std::abs(a.intercept - 2.0) <= 1e-9 &&
                    std::abs(a.r_squared - 1.0) <= 1e-9 && std::abs(a.mean_diff - 2.0) <= 1e-9;
  return {pass, fmtn("slope %.12f, intercept %.12f, R2 %.12f, mean diff %.12f (all within 1e-9)", a.slope,
                     a.intercept, a.r_squared, a.mean_diff)};
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + UCA_EXECUTABLE + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

// Runs every command into `root`. Returns false if any command fails.
bool cli_session(const fs::path& root, int jobs) {
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string r = "\"" + root.string() + "\"";
  const std::string j = " --jobs " + std::to_string(jobs);
  {
    std::ofstream lines(root / "lines.json");
    lines << R"({"width": 64, "height": 48, "lines": [
      {"left": {"x": 10, "y": 10}, "right": {"x": 50, "y": 14}, "region": "thoracic"},
      {"left": {"x": 12, "y": 30}, "right": {"x": 52, "y": 26}, "region": "lumbar"}]})";
  }
  return run_cli("phantom --out " + r + "/data --count 4 --seed 42" + j) == 0 &&
         run_cli("run --case " + r + "/data --out " + r + "/pred --svg " + r + "/svg --diagnostics " + r +
                 "/diag" + j) == 0 &&
         run_cli("run --case " + r + "/data/case_0001 --out " + r + "/single.json") == 0 &&
         run_cli("eval --pred " + r + "/pred --gt " + r + "/data --out " + r + "/report/eval.json") == 0 &&
         run_cli("mask --lines " + r + "/lines.json --out " + r + "/mask.png") == 0 &&
         run_cli("config --out " + r + "/config.json") == 0;
}

Outcome cli_determinism() {
  const fs::path base = fs::temp_directory_path() / ("uca_acceptance_" + std::to_string(::getpid()));
  const bool ok1 = cli_session(base / "a", 1);
  const bool ok2 = cli_session(base / "b", 1);
  const bool ok3 = cli_session(base / "c", 3);
  if (!ok1 || !ok2 || !ok3) {
    fs::remove_all(base);
    return {false, "a CLI command exited non-zero"};
  }
  const auto a = snapshot(base / "a"), b = snapshot(base / "b"), c = snapshot(base / "c");
  fs::remove_all(base);
  const bool pass = a == b && a == c && a.size() > 20;
  return {pass, fmtn("%zu files from phantom/run/eval/mask/config; repeat %s, --jobs 3 %s", a.size(),
                     a == b ? "identical" : "DIFFERS", a == c ? "identical" : "DIFFERS")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"noise-free end-to-end", noise_free_end_to_end},
      {"noisy end-to-end", noisy_end_to_end},
      {"assignment oracle", assignment_oracle},
      {"clustering oracle", clustering_oracle},
      {"dilation oracle", dilation_oracle},
      {"EDE analytic anchors", ede_anchors},
      {"line-integral exactness", line_integral_exactness},
      {"geometry invariances", geometry_invariances},
      {"affinity normalization", affinity_normalization},
      {"agreement statistics", agreement_statistics},
      {"CLI determinism", cli_determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failures;
}
