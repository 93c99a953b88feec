#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hatc/bytes.hpp"
#include "hatc/features.hpp"

namespace hatc {

inline constexpr int kDefaultScaleBits = 8;

struct LocationLayer {
  std::uint16_t count = 0;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t scale_bits = kDefaultScaleBits;
  Bytes payload;  // MSB-first fields, zero padded to a whole byte
};

// ceil(log2(4 n)): width of one quarter-pel coordinate field.
int coordinate_bits(int pixels);

// count * (ceil(log2 4w) + ceil(log2 4h) + scale_bits)
std::int64_t location_rate(std::int64_t count, int width, int height, int scale_bits);

// Log-uniform scale quantizer over [kScaleMin, kScaleMax].
int scale_code(double scale, int scale_bits);
double scale_from_code(int code, int scale_bits);
// Largest log2 dequantization error: half a grid step.
double scale_half_step_log2(int scale_bits);

LocationLayer encode_locations(std::span<const Keypoint> keypoints, int width, int height,
                               int scale_bits = kDefaultScaleBits);
// Orientation and response come back zero; callers recompute what they need.
std::vector<Keypoint> decode_locations(const LocationLayer& layer);

// Bit length of the packed payload.
std::int64_t payload_bits(const LocationLayer& layer);

// "HLOC", u16 count, u16 width, u16 height, u8 scale bits, payload.
inline constexpr std::size_t kLocationHeaderBytes = 11;
Bytes serialize(const LocationLayer& layer);
LocationLayer deserialize_locations(std::span<const std::uint8_t> bytes);

}  // namespace hatc
