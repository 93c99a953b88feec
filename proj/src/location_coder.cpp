#include "hatc/location_coder.hpp"

#include <algorithm>
#include <cmath>

namespace hatc {

int coordinate_bits(int pixels) {
  const std::int64_t levels = 4 * std::int64_t{pixels};
  int bits = 0;
  while ((std::int64_t{1} << bits) < levels) ++bits;
  return bits;
}

std::int64_t location_rate(std::int64_t count, int width, int height, int scale_bits) {
  return count * (coordinate_bits(width) + coordinate_bits(height) + scale_bits);
}

namespace {

void check_scale_bits(int scale_bits) {
  if (scale_bits < 1 || scale_bits > 16) throw Error(Errc::invalid_argument, "scale bits must lie in [1, 16]");
}

double log_span() { return std::log2(kScaleMax) - std::log2(kScaleMin); }

class BitPacker {
 public:
  explicit BitPacker(Bytes& out) : out_(out) {}
  void put(std::uint32_t value, int bits) {
    for (int i = bits - 1; i >= 0; --i) {
      if (fill_ == 0) out_.push_back(0);
      if ((value >> i) & 1u) out_.back() |= static_cast<std::uint8_t>(0x80u >> fill_);
      fill_ = (fill_ + 1) & 7;
    }
  }

 private:
  Bytes& out_;
  int fill_ = 0;
};

class BitUnpacker {
 public:
  explicit BitUnpacker(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint32_t get(int bits) {
    std::uint32_t v = 0;
    for (int i = 0; i < bits; ++i, ++pos_) v = (v << 1) | ((in_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u);
    return v;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

int scale_code(double scale, int scale_bits) {
  check_scale_bits(scale_bits);
  const int top = (1 << scale_bits) - 1;
  const double t = (std::log2(std::clamp(scale, kScaleMin, kScaleMax)) - std::log2(kScaleMin)) / log_span();
  return std::clamp(static_cast<int>(std::lround(t * top)), 0, top);
}

double scale_from_code(int code, int scale_bits) {
  check_scale_bits(scale_bits);
  const int top = (1 << scale_bits) - 1;
  return std::exp2(std::log2(kScaleMin) + log_span() * code / top);
}

double scale_half_step_log2(int scale_bits) { return 0.5 * log_span() / ((1 << scale_bits) - 1); }

std::int64_t payload_bits(const LocationLayer& layer) {
  return location_rate(layer.count, layer.width, layer.height, layer.scale_bits);
}

LocationLayer encode_locations(std::span<const Keypoint> keypoints, int width, int height, int scale_bits) {
  check_scale_bits(scale_bits);
  if (width <= 0 || height <= 0 || width > 65535 || height > 65535)
    throw Error(Errc::invalid_argument, "image dimensions must lie in [1, 65535]");
  if (keypoints.size() > 0xFFFF) throw Error(Errc::invalid_argument, "at most 65535 keypoints per layer");
  LocationLayer layer;
  layer.count = static_cast<std::uint16_t>(keypoints.size());
  layer.width = static_cast<std::uint16_t>(width);
  layer.height = static_cast<std::uint16_t>(height);
  layer.scale_bits = static_cast<std::uint8_t>(scale_bits);
  const int xb = coordinate_bits(width), yb = coordinate_bits(height);
  BitPacker packer(layer.payload);
  for (const auto& kp : keypoints) {
    if (kp.x >= 4u * static_cast<std::uint32_t>(width) || kp.y >= 4u * static_cast<std::uint32_t>(height))
      throw Error(Errc::out_of_bounds_keypoint, "keypoint outside the image");
    packer.put(kp.x, xb);
    packer.put(kp.y, yb);
    packer.put(static_cast<std::uint32_t>(scale_code(kp.scale, scale_bits)), scale_bits);
  }
  return layer;
}

std::vector<Keypoint> decode_locations(const LocationLayer& layer) {
  if (layer.scale_bits < 1 || layer.scale_bits > 16 || layer.width == 0 || layer.height == 0)
    throw Error(Errc::malformed_layer, "invalid location layer header");
  const std::int64_t bits = payload_bits(layer);
  if (static_cast<std::int64_t>(layer.payload.size()) != (bits + 7) / 8)
    throw Error(Errc::malformed_layer, "payload length does not match keypoint count");
  const int xb = coordinate_bits(layer.width), yb = coordinate_bits(layer.height);
  BitUnpacker unpacker(layer.payload);
  std::vector<Keypoint> out;
  out.reserve(layer.count);
  for (int i = 0; i < layer.count; ++i) {
    Keypoint kp;
    kp.x = unpacker.get(xb);
    kp.y = unpacker.get(yb);
    kp.scale = static_cast<float>(scale_from_code(static_cast<int>(unpacker.get(layer.scale_bits)), layer.scale_bits));
    if (kp.x >= 4u * layer.width || kp.y >= 4u * layer.height)
      throw Error(Errc::malformed_layer, "decoded keypoint outside the image");
    out.push_back(kp);
  }
  return out;
}

Bytes serialize(const LocationLayer& layer) {
  Bytes out;
  ByteWriter w(out);
  w.magic("HLOC");
  w.u16(layer.count);
  w.u16(layer.width);
  w.u16(layer.height);
  w.u8(layer.scale_bits);
  w.bytes(layer.payload);
  return out;
}

LocationLayer deserialize_locations(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, Errc::malformed_layer);
  if (!r.magic("HLOC")) throw Error(Errc::bad_magic, "not a location layer");
  LocationLayer layer;
  layer.count = r.u16();
  layer.width = r.u16();
  layer.height = r.u16();
  layer.scale_bits = r.u8();
  auto payload = r.bytes(r.remaining());
  layer.payload.assign(payload.begin(), payload.end());
  if (layer.scale_bits < 1 || layer.scale_bits > 16) throw Error(Errc::malformed_layer, "invalid scale bits");
  if (static_cast<std::int64_t>(layer.payload.size()) != (payload_bits(layer) + 7) / 8)
    throw Error(Errc::malformed_layer, "payload length does not match keypoint count");
  return layer;
}

}  // namespace hatc
