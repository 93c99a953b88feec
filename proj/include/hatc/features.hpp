#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hatc/bitstring.hpp"
#include "hatc/bytes.hpp"
#include "hatc/image.hpp"

namespace hatc {

inline constexpr int kDescriptorBits = 512;
inline constexpr int kMinExtractSide = 32;

// Scale range spanned by the detector pyramid (octaves 1, 2, 4, 8 and the
// intra-octaves 1.5, 3, 6, 12).
inline constexpr double kScaleMin = 1.0;
inline constexpr double kScaleMax = 12.0;

struct Keypoint {
  std::uint32_t x = 0;  // quarter-pel
  std::uint32_t y = 0;  // quarter-pel
  float scale = 1.0f;
  float orientation = 0.0f;  // radians in [0, 2pi)
  float response = 0.0f;

  double x_px() const { return x / 4.0; }
  double y_px() const { return y / 4.0; }

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

// Canonical order: response descending, then (y, x, scale) ascending.
bool canonical_less(const Keypoint& a, const Keypoint& b);

struct FeatureSet {
  std::vector<Keypoint> keypoints;
  std::vector<BitString> descriptors;

  std::size_t size() const { return keypoints.size(); }
  bool empty() const { return keypoints.empty(); }
  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

struct Described {
  std::vector<Keypoint> keypoints;  // survivors, orientation filled in
  std::vector<BitString> descriptors;
  std::vector<std::size_t> dropped;  // input indices rejected at the border
};

// FAST-style corner detection over the scale pyramid with non-maximum
// suppression in space and scale. Keeps corners whose score exceeds
// `threshold`; scores lie in [0, 255].
std::vector<Keypoint> detect(const Image& image, int threshold);

// Orientation bin of the pattern intensity gradient at `kp`.
int orientation_bin(const Image& image, const Keypoint& kp);

// Whether the descriptor support at `kp` fits inside a w x h image.
bool describable(const Keypoint& kp, int width, int height);

Described describe(const Image& image, std::span<const Keypoint> keypoints);

FeatureSet extract(const Image& image, int threshold);

// Fixture format, see README.
Bytes serialize(const FeatureSet& features);
FeatureSet deserialize_features(std::span<const std::uint8_t> bytes);

// Orientation bins are 2pi / 128 wide.
int orientation_code(float radians);
float orientation_from_code(int code);

}  // namespace hatc
