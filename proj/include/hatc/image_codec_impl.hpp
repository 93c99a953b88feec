#pragma once

#include <cmath>

#include "hatc/error.hpp"

namespace hatc {

template <typename A, typename B>
double psnr(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(Errc::dimension_mismatch, "PSNR needs equal sizes");
  if (a.size() == 0) throw Error(Errc::dimension_mismatch, "PSNR of empty images");
  const auto diff = a.template cast<double>() - b.template cast<double>();
  const double mse = diff.square().sum() / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

}  // namespace hatc
