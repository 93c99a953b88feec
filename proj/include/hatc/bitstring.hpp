#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "hatc/error.hpp"

namespace hatc {

// Fixed-length bit string stored in 64-bit words, bit j at word j/64,
// position j%64. Bits past size() are always zero.
class BitString {
 public:
  BitString() = default;
  explicit BitString(int size) : size_(size), words_(static_cast<std::size_t>((size + 63) / 64), 0) {}

  int size() const { return size_; }
  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  bool test(int j) const { return (words_[static_cast<std::size_t>(j >> 6)] >> (j & 63)) & 1u; }
  void set(int j, bool value = true) {
    auto& w = words_[static_cast<std::size_t>(j >> 6)];
    const std::uint64_t mask = std::uint64_t{1} << (j & 63);
    w = value ? (w | mask) : (w & ~mask);
  }

  int popcount() const {
    int n = 0;
    for (auto w : words_) n += std::popcount(w);
    return n;
  }

  // Packed bytes, bit j in byte j/8 at position j%8.
  std::vector<std::uint8_t> to_bytes() const;
  static BitString from_bytes(std::span<const std::uint8_t> bytes, int size);

  BitString& operator^=(const BitString& other) {
    if (other.size_ != size_) throw Error(Errc::dimension_mismatch, "bit string lengths differ");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
    return *this;
  }
  friend BitString operator^(BitString a, const BitString& b) { return a ^= b; }
  friend bool operator==(const BitString&, const BitString&) = default;

  BitString operator~() const;

 private:
  int size_ = 0;
  std::vector<std::uint64_t> words_;
};

inline int hamming(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) throw Error(Errc::dimension_mismatch, "bit string lengths differ");
  int n = 0;
  auto wa = a.words(), wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) n += std::popcount(wa[i] ^ wb[i]);
  return n;
}

}  // namespace hatc
