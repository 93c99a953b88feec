#include <gtest/gtest.h>

#include <random>

#include "hatc/descriptor_coder.hpp"
#include "hatc/pipeline.hpp"
#include "hatc/range_coder.hpp"
#include "support.hpp"

namespace hatc {
namespace {

DexelOrderModel uniform_model(int d, SourceKind kind = SourceKind::intra) {
  DexelOrderModel m;
  m.dimension = d;
  m.order = identity_order(d);
  m.first_prob = 32768;
  m.cond_probs.assign(static_cast<std::size_t>(d - 1), {32768, 32768});
  m.source_kind = kind;
  return m;
}

TEST(RangeCoder, RoundTripWithSkewedProbabilities) {
  std::mt19937_64 rng(21);
  std::vector<std::pair<bool, std::uint16_t>> symbols;
  for (int i = 0; i < 20000; ++i) {
    const auto p = static_cast<std::uint16_t>(1 + rng() % 65535);
    symbols.emplace_back(rng() % 65536 < p, p);
  }
  symbols.emplace_back(true, 1);
  symbols.emplace_back(false, 65535);
  Bytes out;
  RangeEncoder enc(out);
  for (auto [bit, p] : symbols) enc.encode(bit, p);
  enc.finish();
  RangeDecoder dec(out);
  for (auto [bit, p] : symbols) ASSERT_EQ(dec.decode(p), bit);
}

TEST(RangeCoder, ReadingPastEndIsMalformed) {
  Bytes out;
  RangeEncoder enc(out);
  enc.encode(true, 32768);
  enc.finish();
  const std::span<const std::uint8_t> head(out.data(), 2);
  EXPECT_ERRC(RangeDecoder{head}.decode(32768), Errc::malformed_payload);
}

TEST(Residual, XorProperties) {
  std::mt19937_64 rng(22);
  const auto d = test::random_bits(rng, 512);
  EXPECT_EQ(residual(d, d).popcount(), 0);
  EXPECT_EQ(residual(d, BitString(512)), d);
  EXPECT_EQ(apply_residual(d, BitString(512)), d);
  EXPECT_EQ(apply_residual(d, ~BitString(512)), ~d);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto a = test::random_bits(rng, 512), b = test::random_bits(rng, 512);
    const auto r = residual(a, b);
    ASSERT_EQ(r.popcount(), hamming(a, b));
    ASSERT_EQ(apply_residual(b, r), a);
  }
}

TEST(DescriptorBlock, EmptyBlock) {
  const auto model = uniform_model(512);
  const auto block = encode_block({}, model);
  EXPECT_EQ(block.count, 0);
  EXPECT_LE(block.payload.size(), 8u);
  EXPECT_TRUE(decode_block(block, model).empty());
  EXPECT_ERRC(measured_rate({}, model), Errc::empty_input);
}

TEST(DescriptorBlock, LosslessOnRandomVectorsAndTrainedModel) {
  const auto train_set = test::random_vectors(23, 500, 512, 0.2);
  const auto model = train_vectors(train_set, SourceKind::residual, 10);
  for (double p : {0.02, 0.2, 0.5, 0.9}) {
    const auto vs = test::random_vectors(24, 300, 512, p);
    EXPECT_EQ(decode_block(encode_block(vs, model), model), vs) << p;
  }
}

TEST(DescriptorBlock, UniformSourceIsIncompressible) {
  const auto vs = test::random_vectors(25, 1000, 512);
  EXPECT_NEAR(measured_rate(vs, uniform_model(512)), 512.0, 512.0 * 0.02);
}

TEST(DescriptorBlock, AllZeroResidualsUnderTrainedModel) {
  std::vector<std::pair<BitString, BitString>> pairs;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto p = descriptor_pairs(test::scene_image(30 + seed, 200, 150), 50, kDefaultDetectorThreshold);
    pairs.insert(pairs.end(), p.begin(), p.end());
  }
  ASSERT_GE(pairs.size(), 2u);
  const auto model = train(pairs, SourceKind::residual, 50);
  const std::vector<BitString> zeros(100, BitString(512));
  const double analytic = code_length(model, BitString(512));
  const double rate = measured_rate(zeros, model);
  EXPECT_LT(rate, 0.2 * 512);
  EXPECT_LE(rate, analytic + 64.0 / 100 + 1);
  EXPECT_EQ(decode_block(encode_block(zeros, model), model), zeros);
}

TEST(DescriptorBlock, TamperedPayloadFailsChecksum) {
  const auto vs = test::random_vectors(26, 50, 512, 0.3);
  const auto model = uniform_model(512);
  auto block = encode_block(vs, model);
  block.payload[block.payload.size() / 2] ^= 0x10;
  EXPECT_ERRC(decode_block(block, model), Errc::checksum_mismatch);
}

TEST(DescriptorBlock, ModelMismatch) {
  const auto vs = test::random_vectors(27, 5, 512);
  const auto block = encode_block(vs, uniform_model(512, SourceKind::intra));
  EXPECT_ERRC(decode_block(block, uniform_model(512, SourceKind::residual)), Errc::model_mismatch);
}

TEST(DescriptorBlock, SerializeRoundTrip) {
  const auto vs = test::random_vectors(28, 7, 512);
  const auto block = encode_block(vs, uniform_model(512));
  const Bytes bytes = serialize(block);
  EXPECT_EQ(bytes.size(), kBlockOverheadBytes + block.payload.size());
  const auto back = deserialize_block(bytes);
  EXPECT_EQ(back.payload, block.payload);
  EXPECT_EQ(back.count, 7);
  EXPECT_EQ(back.checksum, block.checksum);
  EXPECT_EQ(decode_block(back, uniform_model(512)), vs);
  EXPECT_ERRC(deserialize_block(std::span(bytes).first(bytes.size() - 2)), Errc::malformed_payload);
}

TEST(DescriptorBlock, GoldenPayload) {
  std::mt19937_64 rng(29);
  std::vector<BitString> vs;
  for (int i = 0; i < 40; ++i) {
    BitString b(512);
    for (auto& w : b.words()) w = rng() & rng() & rng();
    vs.push_back(b);
  }
  const auto model = train_vectors(vs, SourceKind::residual, 15);
  const auto block = encode_block(vs, model);
  EXPECT_EQ(test::fnv1a(serialize(block)), 12230536040328898028ull);
}

}  // namespace
}  // namespace hatc
