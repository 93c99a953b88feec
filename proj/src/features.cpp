#include "hatc/features.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <numbers>

#include "pattern.hpp"

namespace hatc {

namespace {

using pattern::kLongPairs;
using pattern::kPatternPoints;
using pattern::kRotation;
using pattern::kRotationBins;
using pattern::kShortPairs;

constexpr int kFastRadius = 3;
constexpr int kFastArc = 9;

// Bresenham circle of radius 3, clockwise from 12 o'clock.
constexpr std::array<std::array<int, 2>, 16> kCircle{{{0, -3}, {1, -3}, {2, -2}, {3, -1},
                                                     {3, 0},  {3, 1},  {2, 2},  {1, 3},
                                                     {0, 3},  {-1, 3}, {-2, 2}, {-3, 1},
                                                     {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}}};

struct Layer {
  Image image;
  double scale = 1.0;
  Plane<std::int16_t> score;
};

// Largest t such that 9 contiguous circle pixels are all brighter than
// centre + t, or all darker than centre - t; 0 when no arc qualifies.
int fast_score(const Image& img, int x, int y) {
  const int centre = img(y, x);
  std::array<int, 16> diff;
  for (int k = 0; k < 16; ++k) diff[k] = img(y + kCircle[k][1], x + kCircle[k][0]) - centre;
  int best = 0;
  for (int start = 0; start < 16; ++start) {
    int lo = 255, hi = 255;
    for (int k = 0; k < kFastArc; ++k) {
      const int d = diff[(start + k) & 15];
      lo = std::min(lo, d);
      hi = std::min(hi, -d);
    }
    best = std::max({best, lo, hi});
  }
  return best;
}

Plane<std::int16_t> score_map(const Image& img) {
  const int h = height(img), w = width(img);
  Plane<std::int16_t> score = Plane<std::int16_t>::Zero(h, w);
  for (int y = kFastRadius; y < h - kFastRadius; ++y)
    for (int x = kFastRadius; x < w - kFastRadius; ++x)
      score(y, x) = static_cast<std::int16_t>(fast_score(img, x, y));
  return score;
}

std::vector<Layer> build_pyramid(const Image& image) {
  constexpr int kOctaves = 4;
  constexpr int kMinLayerSide = 2 * kFastRadius + 3;
  std::vector<Layer> layers;
  Image octave = image;
  Image intra = two_thirds(image);
  double scale = 1.0;
  for (int o = 0; o < kOctaves; ++o) {
    if (std::min(octave.rows(), octave.cols()) < kMinLayerSide) break;
    layers.push_back({octave, scale, {}});
    if (std::min(intra.rows(), intra.cols()) < kMinLayerSide) break;
    layers.push_back({intra, scale * 1.5, {}});
    octave = halve(octave);
    intra = halve(intra);
    scale *= 2.0;
  }
  for (auto& layer : layers) layer.score = score_map(layer.image);
  return layers;
}

// Maximum score in the 3x3 neighbourhood of the point in `layer` nearest to
// the original-image position (px, py).
int neighbourhood_max(const Layer& layer, double px, double py) {
  const int cx = static_cast<int>(std::floor((px + 0.5) / layer.scale));
  const int cy = static_cast<int>(std::floor((py + 0.5) / layer.scale));
  int best = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int x = cx + dx, y = cy + dy;
      if (x < 0 || y < 0 || x >= layer.score.cols() || y >= layer.score.rows()) continue;
      best = std::max(best, static_cast<int>(layer.score(y, x)));
    }
  return best;
}

// Vertex offset of the parabola through (-1, a), (0, b), (1, c), clamped.
double parabola_peak(double a, double b, double c) {
  const double denom = a - 2.0 * b + c;
  if (denom >= 0.0) return 0.0;
  return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
}

bool is_spatial_max(const Plane<std::int16_t>& score, int x, int y) {
  const int s = score(y, x);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const int n = score(y + dy, x + dx);
      const bool earlier = dy < 0 || (dy == 0 && dx < 0);
      if (earlier ? n >= s : n > s) return false;
    }
  return true;
}

std::int64_t round_shift(std::int64_t v, int shift) {
  return (v + (std::int64_t{1} << (shift - 1))) >> shift;
}

int scale_q8(float scale) { return std::max(1, static_cast<int>(std::lround(static_cast<double>(scale) * 256.0))); }

int max_point_radius_q8() {
  static const int r = [] {
    double m = 0;
    for (const auto& p : kPatternPoints) m = std::max(m, std::sqrt(double(p.x) * p.x + double(p.y) * p.y));
    return static_cast<int>(std::ceil(m));
  }();
  return r;
}

int max_sigma_q8() {
  int m = 0;
  for (const auto& p : kPatternPoints) m = std::max(m, p.sigma);
  return m;
}

int box_half(int sigma_q8, int sq8) {
  return static_cast<int>(round_shift(std::int64_t{sigma_q8} * sq8, 16));
}

int support_px(int sq8) {
  const int reach = static_cast<int>((std::int64_t{max_point_radius_q8()} * sq8 + 65535) >> 16) + 1;
  return reach + box_half(max_sigma_q8(), sq8);
}

// Box sums and areas of every pattern point at one keypoint and rotation.
struct Samples {
  std::array<std::int64_t, kPatternPoints.size()> sum;
  std::array<std::int64_t, kPatternPoints.size()> area;
};

Samples sample_pattern(const Plane<std::int64_t>& table, const Keypoint& kp, int bin) {
  const int sq8 = scale_q8(kp.scale);
  const std::int64_t c = kRotation[static_cast<std::size_t>(bin)][0];
  const std::int64_t s = kRotation[static_cast<std::size_t>(bin)][1];
  Samples out;
  for (std::size_t k = 0; k < kPatternPoints.size(); ++k) {
    const auto& p = kPatternPoints[k];
    // Q14 * Q8 * Q8 = Q30 pixels, Q28 quarter-pels.
    const std::int64_t ox = round_shift((c * p.x - s * p.y) * sq8, 28);
    const std::int64_t oy = round_shift((s * p.x + c * p.y) * sq8, 28);
    const int px = static_cast<int>((static_cast<std::int64_t>(kp.x) + ox + 2) >> 2);
    const int py = static_cast<int>((static_cast<std::int64_t>(kp.y) + oy + 2) >> 2);
    const int h = box_half(p.sigma, sq8);
    assert(px - h >= 0 && py - h >= 0 && px + h + 1 < table.cols() && py + h + 1 < table.rows());
    out.sum[k] = box_sum(table, px - h, py - h, px + h + 1, py + h + 1);
    out.area[k] = std::int64_t{2 * h + 1} * (2 * h + 1);
  }
  return out;
}

int orientation_from_samples(const Samples& smp) {
  // Long-pair gradient; doubles restricted to exact-rounded basic operations.
  double gx = 0.0, gy = 0.0;
  for (const auto& pr : kLongPairs) {
    const auto& pi = kPatternPoints[pr.i];
    const auto& pj = kPatternPoints[pr.j];
    const double diff = static_cast<double>(smp.sum[pr.j] * smp.area[pr.i] - smp.sum[pr.i] * smp.area[pr.j]) /
                        static_cast<double>(smp.area[pr.i] * smp.area[pr.j]);
    const double dx = pj.x - pi.x, dy = pj.y - pi.y;
    const double norm2 = dx * dx + dy * dy;
    gx += diff * dx / norm2;
    gy += diff * dy / norm2;
  }
  int best = 0;
  double best_dot = -1.0;
  for (int b = 0; b < kRotationBins; ++b) {
    const double dot = gx * kRotation[static_cast<std::size_t>(b)][0] + gy * kRotation[static_cast<std::size_t>(b)][1];
    if (dot > best_dot) {
      best_dot = dot;
      best = b;
    }
  }
  return best;
}

bool in_support(const Keypoint& kp, int w, int h) {
  const int sup = support_px(scale_q8(kp.scale));
  const std::int64_t cx = (static_cast<std::int64_t>(kp.x) + 2) >> 2;
  const std::int64_t cy = (static_cast<std::int64_t>(kp.y) + 2) >> 2;
  return cx - sup >= 0 && cy - sup >= 0 && cx + sup <= w - 1 && cy + sup <= h - 1;
}

}  // namespace

bool canonical_less(const Keypoint& a, const Keypoint& b) {
  if (a.response != b.response) return a.response > b.response;
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.scale < b.scale;
}

std::vector<Keypoint> detect(const Image& image, int threshold) {
  if (width(image) < kMinExtractSide || height(image) < kMinExtractSide)
    throw Error(Errc::image_too_small, "extraction needs at least 32x32 pixels");
  if (threshold < 0) throw Error(Errc::invalid_argument, "detector threshold must be >= 0");

  const auto layers = build_pyramid(image);
  const int w = width(image), h = height(image);
  std::vector<Keypoint> out;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const Layer& layer = layers[li];
    const auto& score = layer.score;
    for (int y = kFastRadius; y < score.rows() - kFastRadius; ++y)
      for (int x = kFastRadius; x < score.cols() - kFastRadius; ++x) {
        const int s = score(y, x);
        if (s <= threshold || !is_spatial_max(score, x, y)) continue;
        const double px = (x + 0.5) * layer.scale - 0.5;
        const double py = (y + 0.5) * layer.scale - 0.5;
        // Finer layer must be strictly beaten, coarser layer only matched.
        const int finer = li > 0 ? neighbourhood_max(layers[li - 1], px, py) : 0;
        const int coarser = li + 1 < layers.size() ? neighbourhood_max(layers[li + 1], px, py) : 0;
        if (li > 0 && s <= finer) continue;
        if (li + 1 < layers.size() && s < coarser) continue;

        const double ox = parabola_peak(score(y, x - 1), s, score(y, x + 1));
        const double oy = parabola_peak(score(y - 1, x), s, score(y + 1, x));
        const double fx = (x + ox + 0.5) * layer.scale - 0.5;
        const double fy = (y + oy + 0.5) * layer.scale - 0.5;

        double log_scale = std::log2(layer.scale);
        if (li > 0 && li + 1 < layers.size()) {
          const double os = parabola_peak(finer, s, coarser);
          const auto& other = os < 0 ? layers[li - 1] : layers[li + 1];
          log_scale += std::abs(os) * (std::log2(other.scale) - std::log2(layer.scale));
        }
        const double sigma = std::clamp(std::exp2(log_scale), kScaleMin, kScaleMax);

        Keypoint kp;
        kp.x = static_cast<std::uint32_t>(std::clamp<long>(std::lround(4.0 * fx), 0, 4L * w - 1));
        kp.y = static_cast<std::uint32_t>(std::clamp<long>(std::lround(4.0 * fy), 0, 4L * h - 1));
        kp.scale = static_cast<float>(sigma);
        kp.response = static_cast<float>(s);
        out.push_back(kp);
      }
  }
  std::sort(out.begin(), out.end(), canonical_less);
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Keypoint& a, const Keypoint& b) {
                          return a.response == b.response && a.x == b.x && a.y == b.y && a.scale == b.scale;
                        }),
            out.end());
  return out;
}

bool describable(const Keypoint& kp, int w, int h) { return in_support(kp, w, h); }

int orientation_bin(const Image& image, const Keypoint& kp) {
  if (!in_support(kp, width(image), height(image)))
    throw Error(Errc::out_of_bounds_keypoint, "keypoint support leaves the image");
  return orientation_from_samples(sample_pattern(integral(image), kp, 0));
}

Described describe(const Image& image, std::span<const Keypoint> keypoints) {
  Described out;
  if (keypoints.empty()) return out;
  const auto table = integral(image);
  const int w = width(image), h = height(image);
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    Keypoint kp = keypoints[i];
    if (!in_support(kp, w, h)) {
      out.dropped.push_back(i);
      continue;
    }
    const int bin = orientation_from_samples(sample_pattern(table, kp, 0));
    kp.orientation = orientation_from_code(bin);
    const Samples smp = sample_pattern(table, kp, bin);
    BitString bits(kDescriptorBits);
    for (std::size_t k = 0; k < kShortPairs.size(); ++k) {
      const auto& pr = kShortPairs[k];
      // mean_i > mean_j, cross-multiplied.
      if (smp.sum[pr.i] * smp.area[pr.j] > smp.sum[pr.j] * smp.area[pr.i]) bits.set(static_cast<int>(k));
    }
    out.keypoints.push_back(kp);
    out.descriptors.push_back(std::move(bits));
  }
  return out;
}

FeatureSet extract(const Image& image, int threshold) {
  auto keypoints = detect(image, threshold);
  auto described = describe(image, keypoints);
  return {std::move(described.keypoints), std::move(described.descriptors)};
}

int orientation_code(float radians) {
  const double turns = static_cast<double>(radians) / (2.0 * std::numbers::pi);
  const long code = std::lround(turns * kRotationBins);
  return static_cast<int>(((code % kRotationBins) + kRotationBins) % kRotationBins);
}

float orientation_from_code(int code) {
  return static_cast<float>(2.0 * std::numbers::pi * code / kRotationBins);
}

namespace {
int scale_code16(float scale) {
  // Q8 scale, fits u16 over the pyramid range.
  return std::clamp(scale_q8(scale), 0, 65535);
}
}  // namespace

Bytes serialize(const FeatureSet& features) {
  Bytes out;
  ByteWriter w(out);
  w.magic("HFTS");
  w.u16(kDescriptorBits);
  w.u32(static_cast<std::uint32_t>(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& kp = features.keypoints[i];
    w.u32(kp.x);
    w.u32(kp.y);
    w.u16(static_cast<std::uint16_t>(scale_code16(kp.scale)));
    w.u16(static_cast<std::uint16_t>(orientation_code(kp.orientation)));
    w.f32(kp.response);
    w.bytes(features.descriptors[i].to_bytes());
  }
  return out;
}

FeatureSet deserialize_features(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, Errc::malformed_payload);
  if (!r.magic("HFTS")) throw Error(Errc::bad_magic, "not a feature set");
  const int bits = r.u16();
  const std::uint32_t count = r.u32();
  FeatureSet fs;
  for (std::uint32_t i = 0; i < count; ++i) {
    Keypoint kp;
    kp.x = r.u32();
    kp.y = r.u32();
    kp.scale = static_cast<float>(r.u16() / 256.0);
    kp.orientation = orientation_from_code(r.u16());
    kp.response = r.f32();
    fs.keypoints.push_back(kp);
    fs.descriptors.push_back(BitString::from_bytes(r.bytes(static_cast<std::size_t>((bits + 7) / 8)), bits));
  }
  return fs;
}

}  // namespace hatc
