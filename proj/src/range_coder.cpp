#include "hatc/range_coder.hpp"

namespace hatc {

namespace {
constexpr std::uint32_t kTop = 1u << 24;

std::uint32_t split(std::uint32_t range, std::uint16_t p1) {
  const std::uint32_t p0 = (1u << 16) - p1;
  return (range >> 16) * p0;
}
}  // namespace

void RangeEncoder::encode(bool bit, std::uint16_t p1) {
  const std::uint32_t bound = split(range_, p1);
  if (!bit) {
    range_ = bound;
  } else {
    low_ += bound;
    range_ -= bound;
  }
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::shift_low() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t temp = cache_;
    do {
      out_.push_back(static_cast<std::uint8_t>(temp + carry));
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(static_cast<std::uint32_t>(low_) >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> in) : in_(in) {
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next();
}

std::uint8_t RangeDecoder::next() {
  if (pos_ >= in_.size()) throw Error(Errc::malformed_payload, "range coder payload ends early");
  return in_[pos_++];
}

bool RangeDecoder::decode(std::uint16_t p1) {
  const std::uint32_t bound = split(range_, p1);
  bool bit;
  if (code_ < bound) {
    range_ = bound;
    bit = false;
  } else {
    code_ -= bound;
    range_ -= bound;
    bit = true;
  }
  while (range_ < kTop) {
    range_ <<= 8;
    code_ = (code_ << 8) | next();
  }
  return bit;
}

}  // namespace hatc
