#include "hatc/image_codec.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>

namespace hatc {

QualityFactor::QualityFactor(int q) : q_(q) {
  if (q < 1 || q > 100) throw Error(Errc::invalid_argument, "quality factor must lie in [1, 100]");
}

namespace {

using Block = Eigen::Matrix<std::int64_t, 8, 8>;

// Orthonormal DCT-II basis, Q14; row u holds c(u) cos((2x + 1) u pi / 16).
const Block& dct_basis() {
  static const Block basis = [] {
    Block b;
    b << 5793, 5793, 5793, 5793, 5793, 5793, 5793, 5793,
         8035, 6811, 4551, 1598, -1598, -4551, -6811, -8035,
         7568, 3135, -3135, -7568, -7568, -3135, 3135, 7568,
         6811, -1598, -8035, -4551, 4551, 8035, 1598, -6811,
         5793, -5793, -5793, 5793, 5793, -5793, -5793, 5793,
         4551, -8035, 1598, 6811, -6811, -1598, 8035, -4551,
         3135, -7568, 7568, -3135, -3135, 7568, -7568, 3135,
         1598, -4551, 6811, -8035, 8035, -6811, 4551, -1598;
    return b;
  }();
  return basis;
}

constexpr std::array<std::uint8_t, 64> kBaseLuminance{
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

// Zigzag position k -> natural index.
constexpr std::array<std::uint8_t, 64> kZigzag{
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,  12, 19, 26, 33, 40, 48,
    41, 34, 27, 20, 13, 6,  7,  14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23,
    30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

constexpr std::array<std::uint8_t, 16> kDcCounts{0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
constexpr std::array<std::uint8_t, 12> kDcSymbols{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
constexpr std::array<std::uint8_t, 16> kAcCounts{0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 125};
constexpr std::array<std::uint8_t, 162> kAcSymbols{
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07, 0x22, 0x71,
    0x14, 0x32, 0x81, 0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0, 0x24, 0x33, 0x62, 0x72,
    0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2A, 0x34, 0x35, 0x36, 0x37,
    0x38, 0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
    0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83,
    0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3,
    0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3,
    0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA};

struct PrefixCode {
  std::array<std::uint16_t, 256> code{};
  std::array<std::uint8_t, 256> length{};
  // Canonical decode tables per code length 1..16.
  std::array<int, 17> first{};
  std::array<int, 17> count{};
  std::array<int, 17> offset{};
  std::vector<std::uint8_t> symbols;
};

PrefixCode build_code(std::span<const std::uint8_t> counts, std::span<const std::uint8_t> symbols) {
  PrefixCode pc;
  pc.symbols.assign(symbols.begin(), symbols.end());
  int code = 0, k = 0;
  for (int len = 1; len <= 16; ++len) {
    pc.first[len] = code;
    pc.count[len] = counts[len - 1];
    pc.offset[len] = k;
    for (int i = 0; i < counts[len - 1]; ++i, ++k, ++code) {
      pc.code[symbols[k]] = static_cast<std::uint16_t>(code);
      pc.length[symbols[k]] = static_cast<std::uint8_t>(len);
    }
    code <<= 1;
  }
  return pc;
}

const PrefixCode& dc_code() {
  static const PrefixCode pc = build_code(kDcCounts, kDcSymbols);
  return pc;
}

const PrefixCode& ac_code() {
  static const PrefixCode pc = build_code(kAcCounts, kAcSymbols);
  return pc;
}

class BitWriter {
 public:
  explicit BitWriter(Bytes& out) : out_(out) {}
  void put(std::uint32_t bits, int n) {
    for (int i = n - 1; i >= 0; --i) {
      acc_ = static_cast<std::uint8_t>((acc_ << 1) | ((bits >> i) & 1u));
      if (++fill_ == 8) {
        out_.push_back(acc_);
        acc_ = 0;
        fill_ = 0;
      }
    }
  }
  void flush() {
    while (fill_ != 0) put(1, 1);
  }

 private:
  Bytes& out_;
  std::uint8_t acc_ = 0;
  int fill_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> in) : in_(in) {}
  int bit() {
    if (pos_ >= in_.size() * 8) throw Error(Errc::malformed_payload, "image payload ends early");
    const int b = (in_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    return b;
  }
  int bits(int n) {
    int v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | bit();
    return v;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

int magnitude_category(int v) {
  int a = std::abs(v), n = 0;
  while (a) {
    ++n;
    a >>= 1;
  }
  return n;
}

void put_value(BitWriter& bw, int v, int category) {
  if (category == 0) return;
  const int bits = v < 0 ? v - 1 : v;
  bw.put(static_cast<std::uint32_t>(bits) & ((1u << category) - 1u), category);
}

int get_value(BitReader& br, int category) {
  if (category == 0) return 0;
  const int v = br.bits(category);
  return v < (1 << (category - 1)) ? v - (1 << category) + 1 : v;
}

void put_symbol(BitWriter& bw, const PrefixCode& pc, int symbol) {
  bw.put(pc.code[static_cast<std::size_t>(symbol)], pc.length[static_cast<std::size_t>(symbol)]);
}

int get_symbol(BitReader& br, const PrefixCode& pc) {
  int code = 0;
  for (int len = 1; len <= 16; ++len) {
    code = (code << 1) | br.bit();
    const int idx = code - pc.first[len];
    if (idx >= 0 && idx < pc.count[len]) return pc.symbols[static_cast<std::size_t>(pc.offset[len] + idx)];
  }
  throw Error(Errc::malformed_payload, "invalid prefix code in image payload");
}

std::int64_t div_round(std::int64_t num, std::int64_t den) {
  return num >= 0 ? (num + den / 2) / den : -((-num + den / 2) / den);
}

constexpr int kBasisShift = 28;  // Q14 basis applied on both sides

}  // namespace

Eigen::Matrix<std::int32_t, 8, 8> quant_table(QualityFactor q) {
  const int scale = q.value() < 50 ? 5000 / q.value() : 200 - 2 * q.value();
  Eigen::Matrix<std::int32_t, 8, 8> table;
  for (int i = 0; i < 64; ++i) table(i / 8, i % 8) = std::clamp((kBaseLuminance[static_cast<std::size_t>(i)] * scale + 50) / 100, 1, 255);
  return table;
}

Bytes BlockDctCodec::encode(const Image& image, QualityFactor q) const {
  const int w = width(image), h = height(image);
  const int bw = (w + 7) / 8, bh = (h + 7) / 8;
  const Block& basis = dct_basis();
  const auto table = quant_table(q).cast<std::int64_t>();
  Bytes out;
  BitWriter writer(out);
  int previous_dc = 0;
  for (int by = 0; by < bh; ++by)
    for (int bx = 0; bx < bw; ++bx) {
      Block pixels;
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          pixels(y, x) = image(std::min(by * 8 + y, h - 1), std::min(bx * 8 + x, w - 1)) - 128;
      const Block coeff = basis * pixels * basis.transpose();
      std::array<int, 64> zz;
      for (int k = 0; k < 64; ++k) {
        const int n = kZigzag[static_cast<std::size_t>(k)];
        zz[static_cast<std::size_t>(k)] = static_cast<int>(div_round(coeff(n / 8, n % 8), table(n / 8, n % 8) << kBasisShift));
      }
      for (int k = 1; k < 64; ++k) zz[static_cast<std::size_t>(k)] = std::clamp(zz[static_cast<std::size_t>(k)], -1023, 1023);

      const int diff = zz[0] - previous_dc;
      previous_dc = zz[0];
      const int dc_cat = magnitude_category(diff);
      put_symbol(writer, dc_code(), dc_cat);
      put_value(writer, diff, dc_cat);

      int run = 0;
      for (int k = 1; k < 64; ++k) {
        const int v = zz[static_cast<std::size_t>(k)];
        if (v == 0) {
          ++run;
          continue;
        }
        while (run > 15) {
          put_symbol(writer, ac_code(), 0xF0);
          run -= 16;
        }
        const int cat = magnitude_category(v);
        put_symbol(writer, ac_code(), (run << 4) | cat);
        put_value(writer, v, cat);
        run = 0;
      }
      if (run > 0) put_symbol(writer, ac_code(), 0x00);
    }
  writer.flush();
  return out;
}

Image BlockDctCodec::decode(std::span<const std::uint8_t> payload, int w, int h, QualityFactor q) const {
  if (w <= 0 || h <= 0) throw Error(Errc::malformed_payload, "image dimensions must be positive");
  const int bw = (w + 7) / 8, bh = (h + 7) / 8;
  const Block& basis = dct_basis();
  const auto table = quant_table(q).cast<std::int64_t>();
  BitReader reader(payload);
  Image image(h, w);
  int previous_dc = 0;
  for (int by = 0; by < bh; ++by)
    for (int bx = 0; bx < bw; ++bx) {
      std::array<int, 64> zz{};
      const int dc_cat = get_symbol(reader, dc_code());
      if (dc_cat > 11) throw Error(Errc::malformed_payload, "bad DC category");
      previous_dc += get_value(reader, dc_cat);
      zz[0] = previous_dc;
      for (int k = 1; k < 64;) {
        const int sym = get_symbol(reader, ac_code());
        if (sym == 0x00) break;
        if (sym == 0xF0) {
          k += 16;
          continue;
        }
        k += sym >> 4;
        if (k > 63) throw Error(Errc::malformed_payload, "AC run past block end");
        zz[static_cast<std::size_t>(k++)] = get_value(reader, sym & 15);
      }
      Block coeff;
      for (int k = 0; k < 64; ++k) {
        const int n = kZigzag[static_cast<std::size_t>(k)];
        coeff(n / 8, n % 8) = zz[static_cast<std::size_t>(k)] * table(n / 8, n % 8);
      }
      const Block pixels = basis.transpose() * coeff * basis;
      for (int y = 0; y < 8 && by * 8 + y < h; ++y)
        for (int x = 0; x < 8 && bx * 8 + x < w; ++x) {
          const std::int64_t v = div_round(pixels(y, x), std::int64_t{1} << kBasisShift) + 128;
          image(by * 8 + y, bx * 8 + x) = static_cast<std::uint8_t>(std::clamp<std::int64_t>(v, 0, 255));
        }
    }
  return image;
}

const ImageCodec& codec_for(CodecId id) {
  static const BlockDctCodec block_dct;
  switch (id) {
    case CodecId::block_dct: return block_dct;
  }
  throw Error(Errc::malformed_payload, "unknown codec id");
}

CodedImage encode_image(const Image& image, QualityFactor q, const ImageCodec& codec) {
  if (image.rows() > 65535 || image.cols() > 65535 || image.size() == 0)
    throw Error(Errc::invalid_argument, "image dimensions must lie in [1, 65535]");
  CodedImage coded;
  coded.codec = codec.id();
  coded.q = static_cast<std::uint8_t>(q.value());
  coded.width = static_cast<std::uint16_t>(image.cols());
  coded.height = static_cast<std::uint16_t>(image.rows());
  coded.payload = codec.encode(image, q);
  return coded;
}

Image decode_image(const CodedImage& coded) {
  if (coded.q < 1 || coded.q > 100) throw Error(Errc::malformed_payload, "quality factor out of range");
  return codec_for(coded.codec).decode(coded.payload, coded.width, coded.height, QualityFactor(coded.q));
}

Bytes serialize(const CodedImage& coded) {
  Bytes out;
  ByteWriter w(out);
  w.magic("HIMG");
  w.u8(static_cast<std::uint8_t>(coded.codec));
  w.u8(coded.q);
  w.u16(coded.width);
  w.u16(coded.height);
  w.u32(static_cast<std::uint32_t>(coded.payload.size()));
  w.bytes(coded.payload);
  return out;
}

CodedImage deserialize_image(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, Errc::malformed_payload);
  if (!r.magic("HIMG")) throw Error(Errc::bad_magic, "not an image layer");
  CodedImage coded;
  coded.codec = static_cast<CodecId>(r.u8());
  coded.q = r.u8();
  coded.width = r.u16();
  coded.height = r.u16();
  const std::uint32_t n = r.u32();
  auto payload = r.bytes(n);
  coded.payload.assign(payload.begin(), payload.end());
  return coded;
}

}  // namespace hatc
