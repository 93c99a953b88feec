#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Core>

namespace hatc {

// Row-major sample plane: rows() is the height, cols() the width.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// 8-bit grayscale image.
using Image = Plane<std::uint8_t>;

inline int width(const Image& image) { return static_cast<int>(image.cols()); }
inline int height(const Image& image) { return static_cast<int>(image.rows()); }

// Summed-area table with one extra leading row and column of zeros, so the
// box [x0, x1) x [y0, y1) sums to t(y1,x1) - t(y0,x1) - t(y1,x0) + t(y0,x0).
template <typename Derived>
Plane<std::int64_t> integral(const Eigen::ArrayBase<Derived>& image) {
  Plane<std::int64_t> table = Plane<std::int64_t>::Zero(image.rows() + 1, image.cols() + 1);
  for (Eigen::Index y = 0; y < image.rows(); ++y) {
    std::int64_t row = 0;
    for (Eigen::Index x = 0; x < image.cols(); ++x) {
      row += static_cast<std::int64_t>(image(y, x));
      table(y + 1, x + 1) = table(y, x + 1) + row;
    }
  }
  return table;
}

inline std::int64_t box_sum(const Plane<std::int64_t>& table, int x0, int y0, int x1, int y1) {
  return table(y1, x1) - table(y0, x1) - table(y1, x0) + table(y0, x0);
}

// Binary PGM (P5, maxval 255).
Image read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Image& image);

// 2x2 mean decimation (odd trailing row/column dropped).
Image halve(const Image& image);

// Resample to two thirds of the size with fixed-point bilinear weights
// after a [1 2 1] presmoothing pass.
Image two_thirds(const Image& image);

}  // namespace hatc
