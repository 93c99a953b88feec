#include "hatc/bitstring.hpp"

namespace hatc {

std::vector<std::uint8_t> BitString::to_bytes() const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>((size_ + 7) / 8));
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (8 * (i % 8)));
  return out;
}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes, int size) {
  if (bytes.size() != static_cast<std::size_t>((size + 7) / 8))
    throw Error(Errc::dimension_mismatch, "byte count does not match bit length");
  BitString b(size);
  for (std::size_t i = 0; i < bytes.size(); ++i)
    b.words_[i / 8] |= std::uint64_t{bytes[i]} << (8 * (i % 8));
  if (size % 64 != 0 && !b.words_.empty()) b.words_.back() &= (std::uint64_t{1} << (size % 64)) - 1;
  return b;
}

BitString BitString::operator~() const {
  BitString b = *this;
  for (auto& w : b.words_) w = ~w;
  if (size_ % 64 != 0 && !b.words_.empty()) b.words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  return b;
}

}  // namespace hatc
