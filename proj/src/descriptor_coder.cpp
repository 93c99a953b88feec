#include "hatc/descriptor_coder.hpp"

#include <zlib.h>

#include "hatc/range_coder.hpp"

namespace hatc {

BitString residual(const BitString& original, const BitString& predictor) { return original ^ predictor; }

BitString apply_residual(const BitString& predictor, const BitString& residual) { return predictor ^ residual; }

namespace {

std::uint32_t checksum_of(std::span<const BitString> vectors) {
  uLong crc = crc32(0L, Z_NULL, 0);
  for (const auto& v : vectors) {
    const auto bytes = v.to_bytes();
    crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

CodedDescriptorBlock encode_block(std::span<const BitString> vectors, const DexelOrderModel& model) {
  if (vectors.size() > 0xFFFF) throw Error(Errc::invalid_argument, "at most 65535 descriptors per block");
  CodedDescriptorBlock block;
  block.count = static_cast<std::uint16_t>(vectors.size());
  block.source_kind = model.source_kind;
  block.quality_bucket = model.quality_bucket;
  RangeEncoder enc(block.payload);
  for (const auto& v : vectors) {
    if (v.size() != model.dimension) throw Error(Errc::dimension_mismatch, "vector length differs from model");
    bool prev = v.test(model.order[0]);
    enc.encode(prev, model.first_prob);
    for (std::size_t k = 1; k < model.order.size(); ++k) {
      const bool bit = v.test(model.order[k]);
      enc.encode(bit, model.cond_probs[k - 1][prev ? 1 : 0]);
      prev = bit;
    }
  }
  enc.finish();
  block.checksum = checksum_of(vectors);
  return block;
}

std::vector<BitString> decode_block(const CodedDescriptorBlock& block, const DexelOrderModel& model) {
  if (block.source_kind != model.source_kind || block.quality_bucket != model.quality_bucket)
    throw Error(Errc::model_mismatch, "block was coded with a different model");
  RangeDecoder dec(block.payload);
  std::vector<BitString> out;
  out.reserve(block.count);
  for (int i = 0; i < block.count; ++i) {
    BitString v(model.dimension);
    bool prev = dec.decode(model.first_prob);
    v.set(model.order[0], prev);
    for (std::size_t k = 1; k < model.order.size(); ++k) {
      const bool bit = dec.decode(model.cond_probs[k - 1][prev ? 1 : 0]);
      v.set(model.order[k], bit);
      prev = bit;
    }
    out.push_back(std::move(v));
  }
  if (checksum_of(out) != block.checksum) throw Error(Errc::checksum_mismatch, "enhancement layer checksum mismatch");
  return out;
}

double measured_rate(std::span<const BitString> vectors, const DexelOrderModel& model) {
  if (vectors.empty()) throw Error(Errc::empty_input, "rate of an empty block");
  const auto block = encode_block(vectors, model);
  return 8.0 * static_cast<double>(block.payload.size()) / static_cast<double>(vectors.size());
}

Bytes serialize(const CodedDescriptorBlock& block) {
  Bytes out;
  ByteWriter w(out);
  w.magic("HENH");
  w.u16(block.count);
  w.u8(static_cast<std::uint8_t>(block.source_kind));
  w.u8(block.quality_bucket);
  w.u32(static_cast<std::uint32_t>(block.payload.size()));
  w.bytes(block.payload);
  w.u32(block.checksum);
  return out;
}

CodedDescriptorBlock deserialize_block(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, Errc::malformed_payload);
  if (!r.magic("HENH")) throw Error(Errc::bad_magic, "not an enhancement layer");
  CodedDescriptorBlock block;
  block.count = r.u16();
  const std::uint8_t kind = r.u8();
  if (kind > 1) throw Error(Errc::malformed_payload, "unknown source kind");
  block.source_kind = static_cast<SourceKind>(kind);
  block.quality_bucket = r.u8();
  const std::uint32_t n = r.u32();
  auto payload = r.bytes(n);
  block.payload.assign(payload.begin(), payload.end());
  block.checksum = r.u32();
  return block;
}

}  // namespace hatc
