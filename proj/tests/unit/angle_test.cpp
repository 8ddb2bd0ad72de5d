#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "uca/angle.hpp"
#include "uca/errors.hpp"

namespace uca {
namespace {

using Indices = std::vector<std::size_t>;

VertebraLine line_with_slope(double y, double slope_deg, Region region = Region::Thoracic) {
  const double t = slope_deg * M_PI / 180.0;
  const Point2 c{100.0, y};
  const Point2 l{c.x - 20.0 * std::cos(t), c.y - 20.0 * std::sin(t)};
  const Point2 r{c.x + 20.0 * std::cos(t), c.y + 20.0 * std::sin(t)};
  VertebraLine v{{l, Side::Left, region, 1.0}, {r, Side::Right, region, 1.0}, 1.0, 0.0};
  v.slope_deg = line_slope(l, r);
  return v;
}

std::vector<double> angles(const UcaResult& r) {
  std::vector<double> a;
  for (const Curve& c : r.curves) a.push_back(c.angle_deg);
  return a;
}

TEST(LineSlope, Examples) {
  EXPECT_DOUBLE_EQ(line_slope({0, 0}, {10, 0}), 0.0);
  EXPECT_DOUBLE_EQ(line_slope({0, 0}, {10, 10}), 45.0);
  EXPECT_NEAR(line_slope({0, 5}, {10, 0}), -26.565051177, 1e-9);
}

TEST(LineSlope, VerticalOrReversedThrows) {
  EXPECT_THROW(line_slope({3, 0}, {3, 9}), InvariantError);
  EXPECT_THROW(line_slope({5, 0}, {3, 9}), InvariantError);
}

TEST(ExtremalLines, Examples) {
  const std::vector<double> a = {5, 10, 3, -8, -2};
  EXPECT_EQ(find_extremal_lines(a), (Indices{0, 1, 3, 4}));
  const std::vector<double> b = {1, 2, 3, 4};
  EXPECT_EQ(find_extremal_lines(b), (Indices{0, 3}));
  const std::vector<double> c = {7};
  EXPECT_EQ(find_extremal_lines(c), (Indices{0}));
}

TEST(ExtremalLines, PlateauReportsFirstIndex) {
  const std::vector<double> a = {1, 3, 3, 3, 2};
  EXPECT_EQ(find_extremal_lines(a), (Indices{0, 1, 4}));
  // A fully flat sequence is a single plateau.
  const std::vector<double> flat = {2, 2, 2};
  EXPECT_EQ(find_extremal_lines(flat), (Indices{0}));
}

TEST(ExtremalLines, MatchesNeighbourScanOnPlateauFreeInput) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(2 + t % 15);
    for (double& v : s) v = u(rng);
    Indices want = {0};
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if ((s[i] > s[i - 1] && s[i] > s[i + 1]) || (s[i] < s[i - 1] && s[i] < s[i + 1])) want.push_back(i);
    }
    want.push_back(s.size() - 1);
    EXPECT_EQ(find_extremal_lines(s), want);
  }
}

TEST(ComputeUca, TwoLines) {
  const std::vector<VertebraLine> lines = {line_with_slope(10, 10.0), line_with_slope(40, -15.0)};
  const UcaResult r = compute_uca(lines);
  ASSERT_EQ(r.curves.size(), 1u);
  EXPECT_NEAR(r.curves[0].angle_deg, 25.0, 1e-9);
  EXPECT_EQ(r.curves[0].upper, 0u);
  EXPECT_EQ(r.curves[0].lower, 1u);
}

TEST(ComputeUca, SmallSpreadHasNoCurve) {
  const std::vector<double> slopes = {2, 3, 4};
  const std::vector<Region> regions(3, Region::Thoracic);
  const UcaResult r = compute_uca_from_slopes(slopes, regions);
  EXPECT_TRUE(r.curves.empty());
  EXPECT_EQ(r.slopes, slopes);
}

TEST(ComputeUca, FewerThanTwoLines) {
  const std::vector<VertebraLine> one = {line_with_slope(10, 30.0)};
  const UcaResult r = compute_uca(one);
  EXPECT_TRUE(r.curves.empty());
  ASSERT_EQ(r.slopes.size(), 1u);
  EXPECT_NEAR(r.slopes[0], 30.0, 1e-9);
  EXPECT_TRUE(compute_uca({}).curves.empty());
  EXPECT_EQ(r.max_angle(), 0.0);
}

TEST(ComputeUca, SmallWiggleDoesNotSplitCurve) {
  const std::vector<double> slopes = {0, 20, 18, 25, -5};
  const std::vector<Region> regions(5, Region::Thoracic);
  EXPECT_EQ(angles(compute_uca_from_slopes(slopes, regions)), (std::vector<double>{25, 30}));
}

TEST(ComputeUca, EndWiggleIsDropped) {
  const std::vector<double> slopes = {3, 0, 20, -10};
  const std::vector<Region> regions(4, Region::Thoracic);
  const UcaResult r = compute_uca_from_slopes(slopes, regions);
  EXPECT_EQ(angles(r), (std::vector<double>{20, 30}));
  EXPECT_EQ(r.curves[0].upper, 1u);
}

TEST(ComputeUca, RegionSpanLabels) {
  const std::vector<double> slopes = {-12, 12, -12};
  const std::vector<Region> mixed = {Region::Thoracic, Region::Thoracic, Region::Lumbar};
  const UcaResult r = compute_uca_from_slopes(slopes, mixed);
  ASSERT_EQ(r.curves.size(), 2u);
  EXPECT_EQ(r.curves[0].span, RegionSpan::Thoracic);
  EXPECT_EQ(r.curves[1].span, RegionSpan::Spanning);
  const std::vector<Region> lumbar(3, Region::Lumbar);
  EXPECT_EQ(compute_uca_from_slopes(slopes, lumbar).curves[0].span, RegionSpan::Lumbar);
}

TEST(ComputeUca, ThresholdIsStrict) {
  const std::vector<double> slopes = {0, 10};
  const std::vector<Region> regions(2, Region::Thoracic);
  EXPECT_TRUE(compute_uca_from_slopes(slopes, regions).curves.empty());
  const std::vector<double> just_over = {0, 10.001};
  EXPECT_EQ(compute_uca_from_slopes(just_over, regions).curves.size(), 1u);
}

TEST(ComputeUca, MismatchedRegionsRejected) {
  const std::vector<double> slopes = {0, 20};
  const std::vector<Region> regions(3, Region::Thoracic);
  EXPECT_THROW(compute_uca_from_slopes(slopes, regions), InvariantError);
}

class UcaProperties : public ::testing::Test {
 protected:
  std::vector<double> random_slopes(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n(2, 20);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    std::vector<double> s(static_cast<std::size_t>(n(rng)));
    for (double& v : s) v = u(rng);
    return s;
  }
};

TEST_F(UcaProperties, EveryAngleExceedsThreshold) {
  std::mt19937_64 rng(30);
  for (int t = 0; t < 300; ++t) {
    const auto s = random_slopes(rng);
    const std::vector<Region> regions(s.size(), Region::Thoracic);
    for (double th : {0.0, 5.0, 10.0, 20.0}) {
      for (const Curve& c : compute_uca_from_slopes(s, regions, th).curves) {
        EXPECT_GT(c.angle_deg, th);
        EXPECT_DOUBLE_EQ(c.angle_deg, std::abs(s[c.upper] - s[c.lower]));
        EXPECT_LT(c.upper, c.lower);
      }
    }
  }
}

TEST_F(UcaProperties, ReversingOrderKeepsAngles) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 300; ++t) {
    auto s = random_slopes(rng);
    const std::vector<Region> regions(s.size(), Region::Thoracic);
    auto fwd = angles(compute_uca_from_slopes(s, regions));
    std::reverse(s.begin(), s.end());
    auto back = angles(compute_uca_from_slopes(s, regions));
    std::reverse(back.begin(), back.end());
    EXPECT_EQ(fwd, back);
  }
}

TEST_F(UcaProperties, OffsetAllSlopesKeepsAngles) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 200; ++t) {
    auto s = random_slopes(rng);
    const std::vector<Region> regions(s.size(), Region::Thoracic);
    const auto base = angles(compute_uca_from_slopes(s, regions));
    for (double& v : s) v += 7.0;
    const auto shifted = angles(compute_uca_from_slopes(s, regions));
    ASSERT_EQ(base.size(), shifted.size());
    for (std::size_t k = 0; k < base.size(); ++k) EXPECT_NEAR(base[k], shifted[k], 1e-9);
  }
}

TEST(ComputeUca, TranslationAndScaleInvariant) {
  std::vector<VertebraLine> lines;
  const double slopes[] = {5, 18, 2, -14, -3};
  for (int i = 0; i < 5; ++i) lines.push_back(line_with_slope(20.0 + 30.0 * i, slopes[i]));
  const auto base = angles(compute_uca(lines));
  for (VertebraLine& l : lines) {
    for (Landmark* p : {&l.left, &l.right}) p->position = {2.5 * p->position.x + 13.0, 2.5 * p->position.y - 4.0};
  }
  const auto moved = angles(compute_uca(lines));
  ASSERT_EQ(base.size(), moved.size());
  for (std::size_t k = 0; k < base.size(); ++k) EXPECT_NEAR(base[k], moved[k], 1e-9);
}

TEST(RegionSpan, StringRoundTrip) {
  for (RegionSpan s : {RegionSpan::Thoracic, RegionSpan::Lumbar, RegionSpan::Spanning}) {
    EXPECT_EQ(parse_region_span(to_string(s)), s);
  }
}

}  // namespace
}  // namespace uca
