#pragma once

#include <cstdint>
#include <span>

#include "hatc/bytes.hpp"

namespace hatc {

// Binary range coder with carry propagation (32-bit range, 64-bit low) and
// static Q16 probabilities. `p1` is the probability of a one and must lie in
// [1, 65535].
class RangeEncoder {
 public:
  explicit RangeEncoder(Bytes& out) : out_(out) {}

  void encode(bool bit, std::uint16_t p1);
  void finish();

 private:
  void shift_low();

  Bytes& out_;
  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> in);

  bool decode(std::uint16_t p1);
  std::size_t consumed() const { return pos_; }

 private:
  std::uint8_t next();

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
};

}  // namespace hatc
