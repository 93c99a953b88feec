#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "hatc/bytes.hpp"
#include "hatc/descriptor_coder.hpp"
#include "hatc/image_codec.hpp"
#include "hatc/location_coder.hpp"

namespace hatc {

struct LayerSizes {
  std::size_t image = 0;
  std::size_t location = 0;
  std::size_t enhancement = 0;
  std::size_t container = 0;  // header plus layer table

  std::size_t total() const { return image + location + enhancement + container; }
};

struct HatcStream {
  std::optional<CodedImage> image_layer;
  std::optional<LocationLayer> location_layer;
  std::optional<CodedDescriptorBlock> enhancement_layer;
  LayerSizes layer_sizes;  // filled by mux and demux
};

// 16-byte header: "HATC", u8 version, u8 layer count, u16 reserved,
// u32 total length, u32 reserved; then per layer u32 tag, u32 offset,
// u32 length. Offsets count from the start of the stream.
inline constexpr std::size_t kStreamHeaderBytes = 16;
inline constexpr std::size_t kLayerEntryBytes = 12;

Bytes mux(HatcStream& stream);
HatcStream demux(std::span<const std::uint8_t> bytes);

}  // namespace hatc
