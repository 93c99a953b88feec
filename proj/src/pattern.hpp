#pragma once

#include <array>
#include <cstdint>

namespace hatc::pattern {

struct PatternPoint {
  std::int32_t x;      // Q8 pixels at unit scale
  std::int32_t y;      // Q8
  std::int32_t sigma;  // Q8 smoothing half-width at unit scale
};

struct PatternPair {
  std::uint8_t i;
  std::uint8_t j;
};

#include "pattern_table.inc"

}  // namespace hatc::pattern
