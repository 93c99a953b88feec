#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hatc/bitstring.hpp"
#include "hatc/bytes.hpp"
#include "hatc/entropy_model.hpp"

namespace hatc {

// XOR prediction residual between an original descriptor and its predictor.
BitString residual(const BitString& original, const BitString& predictor);
BitString apply_residual(const BitString& predictor, const BitString& residual);

struct CodedDescriptorBlock {
  std::uint16_t count = 0;
  SourceKind source_kind = SourceKind::residual;
  std::uint8_t quality_bucket = 0;
  Bytes payload;
  std::uint32_t checksum = 0;  // CRC-32 of the packed decoded vectors
};

// Entropy codes every vector in model.order under the model's first-order
// contexts. Lossless.
CodedDescriptorBlock encode_block(std::span<const BitString> vectors, const DexelOrderModel& model);
std::vector<BitString> decode_block(const CodedDescriptorBlock& block, const DexelOrderModel& model);

// Payload bits per vector, block header and checksum excluded.
double measured_rate(std::span<const BitString> vectors, const DexelOrderModel& model);

// "HENH", u16 count, u8 kind, u8 quality bucket, u32 length, payload, u32 checksum.
inline constexpr std::size_t kBlockOverheadBytes = 16;
Bytes serialize(const CodedDescriptorBlock& block);
CodedDescriptorBlock deserialize_block(std::span<const std::uint8_t> bytes);

}  // namespace hatc
