#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hatc/bitstring.hpp"
#include "hatc/image.hpp"
#include "hatc/synth.hpp"

namespace hatc::test {

inline BitString random_bits(std::mt19937_64& rng, int size, double p_one = 0.5) {
  BitString b(size);
  std::bernoulli_distribution one(p_one);
  for (int j = 0; j < size; ++j) b.set(j, one(rng));
  return b;
}

inline std::vector<BitString> random_vectors(std::uint64_t seed, std::size_t n, int size, double p_one = 0.5) {
  std::mt19937_64 rng(seed);
  std::vector<BitString> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_bits(rng, size, p_one));
  return out;
}

inline std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline Image black_square(int side, int x0, int y0, int x1, int y1) {
  Image img = Image::Constant(side, side, 255);
  img.block(y0, x0, y1 - y0, x1 - x0).setZero();
  return img;
}

// Textured scene view used wherever a realistic test image is needed.
inline Image scene_image(std::uint64_t seed, int width = 160, int height = 120) {
  return render_view(render_scene(seed, seed + 1, width, height), seed + 2, width, height);
}

}  // namespace hatc::test

#define EXPECT_ERRC(statement, errc)                                   \
  do {                                                                 \
    try {                                                              \
      statement;                                                       \
      ADD_FAILURE() << "expected " << ::hatc::to_string(errc);         \
    } catch (const ::hatc::Error& e) {                                 \
      EXPECT_EQ(e.code(), errc) << e.what();                           \
    }                                                                  \
  } while (0)
