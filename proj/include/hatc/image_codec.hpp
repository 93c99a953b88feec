#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "hatc/bytes.hpp"
#include "hatc/image.hpp"

namespace hatc {

class QualityFactor {
 public:
  explicit QualityFactor(int q);
  int value() const { return q_; }
  friend bool operator==(QualityFactor, QualityFactor) = default;

 private:
  int q_;
};

enum class CodecId : std::uint8_t { block_dct = 1 };

struct CodedImage {
  CodecId codec = CodecId::block_dct;
  std::uint8_t q = 50;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  Bytes payload;
};

// Lossy grayscale codec behind the image layer.
class ImageCodec {
 public:
  virtual ~ImageCodec() = default;
  virtual CodecId id() const = 0;
  virtual Bytes encode(const Image& image, QualityFactor q) const = 0;
  virtual Image decode(std::span<const std::uint8_t> payload, int width, int height, QualityFactor q) const = 0;
};

// 8x8 block DCT, quality-scaled luminance quantization, zigzag scan and
// run-length symbols under the canonical baseline prefix tables.
class BlockDctCodec final : public ImageCodec {
 public:
  CodecId id() const override { return CodecId::block_dct; }
  Bytes encode(const Image& image, QualityFactor q) const override;
  Image decode(std::span<const std::uint8_t> payload, int width, int height, QualityFactor q) const override;
};

const ImageCodec& codec_for(CodecId id);

// Quantizer step per coefficient in natural (row-major) order.
Eigen::Matrix<std::int32_t, 8, 8> quant_table(QualityFactor q);

CodedImage encode_image(const Image& image, QualityFactor q, const ImageCodec& codec = codec_for(CodecId::block_dct));
Image decode_image(const CodedImage& coded);

// Container: "HIMG", u8 codec, u8 q, u16 width, u16 height, u32 length, payload.
Bytes serialize(const CodedImage& coded);
CodedImage deserialize_image(std::span<const std::uint8_t> bytes);

inline constexpr double kPsnrCap = 99.0;

// 10 log10(255^2 / MSE), capped at 99 dB for identical inputs.
template <typename A, typename B>
double psnr(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b);

}  // namespace hatc

#include "hatc/image_codec_impl.hpp"
