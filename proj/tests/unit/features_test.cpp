#include <gtest/gtest.h>

#include <cmath>

#include "hatc/features.hpp"
#include "pattern.hpp"
#include "support.hpp"

namespace hatc {
namespace {

// Descriptor bits recomputed from direct pixel sums over each pattern box.
BitString pattern_oracle(const Image& img, const Keypoint& kp) {
  const int bin = orientation_code(kp.orientation);
  const long double c = pattern::kRotation[bin][0], s = pattern::kRotation[bin][1];
  const long double sq8 = std::max(1.0L, std::round(static_cast<long double>(kp.scale) * 256.0L));
  std::vector<long double> mean;
  for (const auto& p : pattern::kPatternPoints) {
    const long double ox = std::floor((c * p.x - s * p.y) * sq8 / (1L << 28) + 0.5L);
    const long double oy = std::floor((s * p.x + c * p.y) * sq8 / (1L << 28) + 0.5L);
    const int px = static_cast<int>(std::floor((kp.x + ox + 2) / 4));
    const int py = static_cast<int>(std::floor((kp.y + oy + 2) / 4));
    const int h = static_cast<int>(std::floor(p.sigma * sq8 / 65536.0L + 0.5L));
    long double sum = 0;
    for (int y = py - h; y <= py + h; ++y)
      for (int x = px - h; x <= px + h; ++x) sum += img(y, x);
    mean.push_back(sum / ((2 * h + 1) * (2 * h + 1)));
  }
  BitString bits(kDescriptorBits);
  for (std::size_t k = 0; k < pattern::kShortPairs.size(); ++k)
    if (mean[pattern::kShortPairs[k].i] > mean[pattern::kShortPairs[k].j]) bits.set(static_cast<int>(k));
  return bits;
}

// Segment-test corner oracle at full resolution: 9 contiguous circle pixels
// all brighter or all darker than the centre by more than t.
bool is_fast_corner(const Image& img, int x, int y, int t) {
  static const int cx[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};
  static const int cy[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};
  for (int sign : {1, -1})
    for (int start = 0; start < 16; ++start) {
      bool ok = true;
      for (int k = 0; k < 9 && ok; ++k) {
        const int i = (start + k) % 16;
        ok = sign * (img(y + cy[i], x + cx[i]) - img(y, x)) > t;
      }
      if (ok) return true;
    }
  return false;
}

TEST(Detect, FlatImageHasNoCorners) {
  const Image flat = Image::Constant(64, 64, 128);
  EXPECT_TRUE(detect(flat, 70).empty());
  EXPECT_TRUE(detect(flat, 0).empty());
  EXPECT_TRUE(detect(test::scene_image(3), 255).empty());
}

TEST(Detect, BlackSquareCornersAgreeWithSegmentTest) {
  const Image img = test::black_square(96, 30, 30, 66, 66);
  const auto kps = detect(img, 70);
  ASSERT_FALSE(kps.empty());
  std::vector<std::pair<int, int>> oracle;
  for (int y = 3; y < 93; ++y)
    for (int x = 3; x < 93; ++x)
      if (is_fast_corner(img, x, y, 70)) oracle.emplace_back(x, y);
  ASSERT_FALSE(oracle.empty());
  // Base-layer detections sit on segment-test corners; coarser ones stay
  // within 2.5 scale units of a square corner.
  const double corners[4][2] = {{29.5, 29.5}, {65.5, 29.5}, {29.5, 65.5}, {65.5, 65.5}};
  for (const auto& kp : kps) {
    double to_oracle = 1e9, to_corner = 1e9;
    for (auto [x, y] : oracle) to_oracle = std::min(to_oracle, std::hypot(kp.x_px() - x, kp.y_px() - y));
    for (const auto& c : corners) to_corner = std::min(to_corner, std::hypot(kp.x_px() - c[0], kp.y_px() - c[1]));
    if (kp.scale < 1.5f) EXPECT_LE(to_oracle, 1.0) << kp.x_px() << "," << kp.y_px();
    EXPECT_LE(to_corner, 2.5 * std::max(1.0f, kp.scale)) << kp.x_px() << "," << kp.y_px();
  }
  for (const auto& c : corners) {
    double best = 1e9;
    for (const auto& kp : kps)
      if (kp.scale < 2.5f) best = std::min(best, std::hypot(kp.x_px() - c[0], kp.y_px() - c[1]));
    EXPECT_LE(best, 2.5) << c[0] << "," << c[1];
  }
}

TEST(Detect, CanonicalOrder) {
  const auto kps = detect(test::scene_image(4), 30);
  ASSERT_GT(kps.size(), 10u);
  for (std::size_t i = 1; i < kps.size(); ++i) EXPECT_FALSE(canonical_less(kps[i], kps[i - 1]));
}

TEST(Detect, TooSmall) {
  EXPECT_ERRC(detect(Image::Constant(31, 64, 0), 30), Errc::image_too_small);
  EXPECT_ERRC(extract(Image::Constant(64, 31, 0), 30), Errc::image_too_small);
}

TEST(Describe, MatchesPatternOracle) {
  const Image img = test::scene_image(5);
  const auto fs = extract(img, 30);
  ASSERT_GT(fs.size(), 20u);
  ASSERT_EQ(fs.keypoints.size(), fs.descriptors.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    EXPECT_EQ(fs.descriptors[i].size(), kDescriptorBits);
    EXPECT_EQ(fs.descriptors[i], pattern_oracle(img, fs.keypoints[i])) << i;
  }
}

TEST(Describe, InvariantToIntensityScaling) {
  Image img = test::scene_image(6);
  img = (img.cast<int>() / 2).cast<std::uint8_t>();
  const Image doubled = (img.cast<int>() * 2).cast<std::uint8_t>();
  const auto kps = detect(img, 30);
  const auto a = describe(img, kps);
  const auto b = describe(doubled, kps);
  ASSERT_FALSE(a.descriptors.empty());
  EXPECT_EQ(a.descriptors, b.descriptors);
  EXPECT_EQ(a.keypoints, b.keypoints);
}

TEST(Describe, ConstantPatchGivesZeroBits) {
  Keypoint kp;
  kp.x = 4 * 48;
  kp.y = 4 * 48;
  kp.scale = 1.0f;
  const auto d = describe(Image::Constant(96, 96, 77), std::span(&kp, 1));
  ASSERT_EQ(d.descriptors.size(), 1u);
  EXPECT_EQ(d.descriptors[0].popcount(), 0);
}

TEST(Describe, BorderKeypointsDropped) {
  Keypoint inside, edge;
  inside.x = inside.y = 4 * 48;
  edge.x = edge.y = 4;
  const std::vector<Keypoint> kps{edge, inside};
  const auto d = describe(test::scene_image(7, 96, 96), kps);
  EXPECT_EQ(d.dropped, std::vector<std::size_t>{0});
  EXPECT_EQ(d.keypoints.size(), 1u);
  EXPECT_FALSE(describable(edge, 96, 96));
  EXPECT_TRUE(describable(inside, 96, 96));
}

TEST(Extract, DeterministicAndGolden) {
  const Image img = test::scene_image(8, 96, 64);
  const auto a = extract(img, 30);
  EXPECT_EQ(a, extract(img, 30));
  EXPECT_EQ(test::fnv1a(serialize(a)), 12184111728280847426ull);
}

TEST(Extract, SerializeRoundTrip) {
  const auto fs = extract(test::scene_image(9), 30);
  const auto back = deserialize_features(serialize(fs));
  ASSERT_EQ(back.size(), fs.size());
  EXPECT_EQ(back.descriptors, fs.descriptors);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    EXPECT_EQ(back.keypoints[i].x, fs.keypoints[i].x);
    EXPECT_EQ(back.keypoints[i].y, fs.keypoints[i].y);
  }
}

TEST(Orientation, CodeRoundTrip) {
  for (int code = 0; code < 128; ++code) EXPECT_EQ(orientation_code(orientation_from_code(code)), code);
  EXPECT_EQ(orientation_code(static_cast<float>(2 * std::numbers::pi)), 0);
}

}  // namespace
}  // namespace hatc
