#include "hatc/container.hpp"

#include <array>
#include <cstring>
#include <string_view>
#include <vector>

namespace hatc {

namespace {

constexpr std::uint8_t kVersion = 1;

struct Entry {
  std::string_view tag;
  Bytes bytes;
};

std::uint32_t tag_value(std::string_view tag) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<std::uint8_t>(tag[static_cast<std::size_t>(i)])} << (8 * i);
  return v;
}

}  // namespace

Bytes mux(HatcStream& stream) {
  std::vector<Entry> entries;
  if (stream.image_layer) entries.push_back({"HIMG", serialize(*stream.image_layer)});
  if (stream.location_layer) entries.push_back({"HLOC", serialize(*stream.location_layer)});
  if (stream.enhancement_layer) entries.push_back({"HENH", serialize(*stream.enhancement_layer)});
  if (entries.empty()) throw Error(Errc::no_layers, "stream carries no layers");

  const std::size_t table_end = kStreamHeaderBytes + kLayerEntryBytes * entries.size();
  std::size_t total = table_end;
  for (const auto& e : entries) total += e.bytes.size();

  Bytes out;
  out.reserve(total);
  ByteWriter w(out);
  w.magic("HATC");
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(entries.size()));
  w.u16(0);
  w.u32(static_cast<std::uint32_t>(total));
  w.u32(0);
  std::size_t offset = table_end;
  for (const auto& e : entries) {
    w.u32(tag_value(e.tag));
    w.u32(static_cast<std::uint32_t>(offset));
    w.u32(static_cast<std::uint32_t>(e.bytes.size()));
    offset += e.bytes.size();
  }
  stream.layer_sizes = {};
  stream.layer_sizes.container = table_end;
  for (const auto& e : entries) {
    w.bytes(e.bytes);
    if (e.tag == "HIMG") stream.layer_sizes.image = e.bytes.size();
    if (e.tag == "HLOC") stream.layer_sizes.location = e.bytes.size();
    if (e.tag == "HENH") stream.layer_sizes.enhancement = e.bytes.size();
  }
  return out;
}

HatcStream demux(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, Errc::truncated);
  if (!r.magic("HATC")) throw Error(Errc::bad_magic, "not a HATC stream");
  if (r.u8() != kVersion) throw Error(Errc::malformed_payload, "unsupported stream version");
  const int count = r.u8();
  r.u16();
  const std::uint32_t total = r.u32();
  r.u32();
  if (total > bytes.size()) throw Error(Errc::truncated, "stream shorter than its declared length");
  if (count == 0) throw Error(Errc::no_layers, "stream carries no layers");

  HatcStream stream;
  stream.layer_sizes.container = kStreamHeaderBytes + kLayerEntryBytes * static_cast<std::size_t>(count);
  for (int i = 0; i < count; ++i) {
    const std::uint32_t tag = r.u32();
    const std::uint32_t offset = r.u32();
    const std::uint32_t length = r.u32();
    if (std::uint64_t{offset} + length > bytes.size()) throw Error(Errc::truncated, "layer extends past the buffer");
    const auto body = bytes.subspan(offset, length);
    if (tag == tag_value("HIMG")) {
      if (stream.image_layer) throw Error(Errc::duplicate_layer, "image layer appears twice");
      stream.image_layer = deserialize_image(body);
      stream.layer_sizes.image = length;
    } else if (tag == tag_value("HLOC")) {
      if (stream.location_layer) throw Error(Errc::duplicate_layer, "location layer appears twice");
      stream.location_layer = deserialize_locations(body);
      stream.layer_sizes.location = length;
    } else if (tag == tag_value("HENH")) {
      if (stream.enhancement_layer) throw Error(Errc::duplicate_layer, "enhancement layer appears twice");
      stream.enhancement_layer = deserialize_block(body);
      stream.layer_sizes.enhancement = length;
    } else {
      throw Error(Errc::malformed_payload, "unknown layer tag");
    }
  }
  return stream;
}

}  // namespace hatc
