#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hatc/entropy_model.hpp"
#include "support.hpp"

namespace hatc {
namespace {

BitString bits(std::initializer_list<int> values) {
  BitString b(static_cast<int>(values.size()));
  int j = 0;
  for (int v : values) b.set(j++, v != 0);
  return b;
}

DexelStats stats_of(std::span<const BitString> vectors) {
  DexelStats s(vectors.front().size());
  for (const auto& v : vectors) s.accumulate(v);
  return s;
}

// Entropies recounted straight from the vectors.
double oracle_marginal(std::span<const BitString> vs, int j) {
  double ones = 0;
  for (const auto& v : vs) ones += v.test(j);
  const double p = ones / static_cast<double>(vs.size());
  double h = 0;
  for (double x : {p, 1 - p})
    if (x > 0) h -= x * std::log2(x);
  return h;
}

double oracle_conditional(std::span<const BitString> vs, int j1, int j2) {
  double n[2][2] = {};
  for (const auto& v : vs) n[v.test(j1)][v.test(j2)] += 1;
  const double total = static_cast<double>(vs.size());
  double h = 0;
  for (int y = 0; y < 2; ++y) {
    const double ny = n[0][y] + n[1][y];
    for (int x = 0; x < 2; ++x)
      if (n[x][y] > 0) h -= n[x][y] / total * std::log2(n[x][y] / ny);
  }
  return h;
}

std::vector<int> oracle_greedy(std::span<const BitString> vs) {
  const int d = vs.front().size();
  std::vector<int> order;
  std::vector<bool> used(static_cast<std::size_t>(d));
  int best_j = 0;
  for (int j = 1; j < d; ++j)
    if (oracle_marginal(vs, j) < oracle_marginal(vs, best_j)) best_j = j;
  order.push_back(best_j);
  used[static_cast<std::size_t>(best_j)] = true;
  while (static_cast<int>(order.size()) < d) {
    int next = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < d; ++j)
      if (!used[static_cast<std::size_t>(j)]) {
        const double h = oracle_conditional(vs, j, order.back());
        if (h < best) best = h, next = j;
      }
    order.push_back(next);
    used[static_cast<std::size_t>(next)] = true;
  }
  return order;
}

double oracle_chain(std::span<const BitString> vs, std::span<const int> order) {
  double h = oracle_marginal(vs, order[0]);
  for (std::size_t k = 1; k < order.size(); ++k) h += oracle_conditional(vs, order[k], order[k - 1]);
  return h;
}

// Four vectors in which every pair of positions with different parity takes
// each value combination exactly once.
std::vector<BitString> balanced_pairs(int d) {
  std::vector<BitString> out;
  for (int v = 0; v < 4; ++v) {
    BitString b(d);
    for (int j = 0; j < d; ++j) b.set(j, (v >> (j % 2)) & 1);
    out.push_back(b);
  }
  return out;
}

TEST(DexelStats, AllZerosVector) {
  DexelStats s(8);
  s.accumulate(BitString(8));
  for (int j = 0; j < 8; ++j) {
    EXPECT_EQ(s.zeros(j), 1);
    EXPECT_EQ(s.ones(j), 0);
  }
}

TEST(DexelStats, TwoComplementaryVectors) {
  const std::vector<BitString> vs{bits({0, 1}), bits({1, 0})};
  const auto s = stats_of(vs);
  EXPECT_EQ(s.ones(0), 1);
  EXPECT_EQ(s.ones(1), 1);
  EXPECT_DOUBLE_EQ(marginal_entropy(s, 0), 1.0);
}

TEST(DexelStats, JointTablesMatchRecount) {
  const auto vs = test::random_vectors(11, 1000, 24, 0.3);
  DexelStats batch(24);
  batch.accumulate(vs);
  const auto single = stats_of(vs);
  for (int a = 0; a < 24; ++a)
    for (int b = 0; b < 24; ++b) {
      std::int64_t n[2][2] = {};
      for (const auto& v : vs) ++n[v.test(a)][v.test(b)];
      const auto t = batch.joint(a, b);
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) EXPECT_EQ(t(x, y), n[x][y]);
      EXPECT_EQ(single.joint(a, b), t);
      EXPECT_EQ(t.row(1).sum(), batch.ones(a));
      EXPECT_EQ(t.col(1).sum(), batch.ones(b));
    }
}

TEST(DexelStats, MergeEqualsJointAccumulation) {
  const auto vs = test::random_vectors(12, 200, 16);
  DexelStats a(16), b(16), all(16);
  a.accumulate(std::span(vs).first(80));
  b.accumulate(std::span(vs).subspan(80));
  all.accumulate(vs);
  a.merge(b);
  EXPECT_EQ(a.sample_count(), all.sample_count());
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) EXPECT_EQ(a.joint(i, j), all.joint(i, j));
}

TEST(DexelStats, DimensionMismatchThrows) {
  DexelStats s(8);
  EXPECT_ERRC(s.accumulate(BitString(9)), Errc::dimension_mismatch);
}

TEST(Entropy, BinaryEntropyValues) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.11), 0.4999, 1e-3);
}

TEST(Entropy, MarginalFromCounts) {
  std::vector<BitString> vs;
  for (int i = 0; i < 100; ++i) vs.push_back(bits({i < 11, 0}));
  const auto s = stats_of(vs);
  EXPECT_NEAR(marginal_entropy(s, 0), 0.4999, 1e-3);
  EXPECT_DOUBLE_EQ(marginal_entropy(s, 1), 0.0);
}

TEST(Entropy, ConditionalFromJointTable) {
  Eigen::Matrix<std::int64_t, 2, 2> t;
  t << 40, 10, 10, 40;
  EXPECT_NEAR(conditional_entropy(t), 0.7219, 1e-3);
}

TEST(Entropy, IndependentPositions) {
  const std::vector<BitString> vs{bits({0, 0}), bits({0, 1}), bits({1, 0}), bits({1, 1})};
  const auto s = stats_of(vs);
  EXPECT_NEAR(conditional_entropy(s, 0, 1), marginal_entropy(s, 0), 1e-6);
}

TEST(Entropy, FullyCorrelatedPositions) {
  const std::vector<BitString> vs{bits({0, 0}), bits({1, 1}), bits({1, 1})};
  EXPECT_DOUBLE_EQ(conditional_entropy(stats_of(vs), 0, 1), 0.0);
}

TEST(Entropy, Errors) {
  DexelStats empty(4);
  EXPECT_ERRC(marginal_entropy(empty, 0), Errc::empty_stats);
  EXPECT_ERRC(conditional_entropy(empty, 0, 1), Errc::empty_stats);
  const auto s = accumulate(DexelStats(4), BitString(4));
  EXPECT_ERRC(conditional_entropy(s, 2, 2), Errc::same_position);
}

TEST(GreedyOrder, StartsWithLowestMarginalEntropy) {
  std::vector<BitString> vs;
  for (int i = 0; i < 1000; ++i) vs.push_back(bits({i < 316, i < 110}));
  const auto s = stats_of(vs);
  EXPECT_NEAR(marginal_entropy(s, 0), 0.9, 0.01);
  EXPECT_NEAR(marginal_entropy(s, 1), 0.5, 0.01);
  EXPECT_EQ(greedy_order(s).front(), 1);
}

TEST(GreedyOrder, AllTiesGiveIdentity) {
  std::vector<BitString> vs;
  for (int v = 0; v < 16; ++v) vs.push_back(bits({v & 1, (v >> 1) & 1, (v >> 2) & 1, (v >> 3) & 1}));
  EXPECT_EQ(greedy_order(stats_of(vs)), identity_order(4));
}

TEST(GreedyOrder, MatchesStepByStepReplay) {
  // Position 2 is nearly constant, position 0 copies it with noise, position
  // 1 is independent.
  std::mt19937_64 rng(13);
  std::vector<BitString> vs;
  for (int i = 0; i < 400; ++i) {
    const bool c = rng() % 10 == 0;
    const bool copy = rng() % 8 == 0 ? !c : c;
    vs.push_back(bits({copy, static_cast<int>(rng() & 1), c}));
  }
  const auto s = stats_of(vs);
  const auto order = greedy_order(s);
  EXPECT_EQ(order, oracle_greedy(vs));
  EXPECT_NEAR(chain_bound(s, order), oracle_chain(vs, order), 1e-9);
  EXPECT_LE(chain_bound(s, order), chain_bound(s, identity_order(3)));

  // Among all orders, the greedy one beats every order sharing its first step.
  std::vector<int> perm{0, 1, 2};
  do {
    if (perm[0] == order[0]) EXPECT_LE(chain_bound(s, order), chain_bound(s, perm) + 1e-12);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST(GreedyOrder, MatchesReplayOnRandomSources) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto vs = test::random_vectors(100 + seed, 300, 10, 0.2);
    EXPECT_EQ(greedy_order(stats_of(vs)), oracle_greedy(vs)) << seed;
  }
}

TEST(ChainBound, BalancedSourceCostsOneBitPerDexel) {
  const auto vs = balanced_pairs(512);
  EXPECT_DOUBLE_EQ(chain_bound(stats_of(vs), identity_order(512)), 512.0);
}

TEST(ChainBound, PerfectlyCorrelatedCostsFirstMarginalOnly) {
  std::vector<BitString> vs;
  for (int i = 0; i < 10; ++i) {
    BitString b(32);
    if (i < 3)
      for (int j = 0; j < 32; ++j) b.set(j);
    vs.push_back(b);
  }
  const auto s = stats_of(vs);
  EXPECT_NEAR(chain_bound(s, identity_order(32)), binary_entropy(0.3), 1e-12);
}

TEST(ChainBound, RejectsBadPermutations) {
  const auto s = stats_of(balanced_pairs(4));
  const std::vector<int> repeated{0, 1, 1, 3}, short_order{0, 1, 2};
  EXPECT_ERRC(chain_bound(s, repeated), Errc::invalid_permutation);
  EXPECT_ERRC(chain_bound(s, short_order), Errc::invalid_permutation);
}

TEST(Train, IdenticalPairsGiveFloorProbabilities) {
  const auto vs = test::random_vectors(14, 100, 512);
  std::vector<std::pair<BitString, BitString>> pairs;
  for (const auto& v : vs) pairs.emplace_back(v, v);
  const auto model = train(pairs, SourceKind::residual, 50);
  EXPECT_EQ(model.quality_bucket, 50);
  // (0 + 1) / (100 + 2) in Q16.
  EXPECT_EQ(model.first_prob, 643);
  for (const auto& c : model.cond_probs) {
    EXPECT_EQ(c[0], 643);
    EXPECT_EQ(c[1], 32768);  // context never observed
  }
}

TEST(Train, IntraUniformDataNearFullLength) {
  const auto vs = test::random_vectors(15, 2000, 512);
  const auto model = train_vectors(vs, SourceKind::intra, 70);
  EXPECT_EQ(model.quality_bucket, 0);
  DexelStats s(512);
  s.accumulate(vs);
  EXPECT_NEAR(chain_bound(s, model.order), 512.0, 512.0 * 0.02);
}

TEST(Train, NeedsTwoVectors) {
  const auto vs = test::random_vectors(16, 1, 8);
  EXPECT_ERRC(train_vectors(vs, SourceKind::intra, 0), Errc::insufficient_data);
}

TEST(Model, CodeLengthOfAllZeroVectorUnderFloorModel) {
  const auto vs = test::random_vectors(17, 50, 64);
  std::vector<std::pair<BitString, BitString>> pairs;
  for (const auto& v : vs) pairs.emplace_back(v, v);
  const auto model = train(pairs, SourceKind::residual, 10);
  const double p0 = 1.0 - 1260.0 / 65536.0;  // round(65536 / 52)
  EXPECT_NEAR(code_length(model, BitString(64)), -64 * std::log2(p0), 1e-9);
}

TEST(Model, SerializeRoundTripAndGoldenHash) {
  // Raw engine bits, independent of library distributions.
  std::mt19937_64 rng(18);
  std::vector<BitString> vs;
  for (int i = 0; i < 300; ++i) {
    BitString b(512);
    for (auto& w : b.words()) w = rng() & rng();
    vs.push_back(b);
  }
  const auto model = train_vectors(vs, SourceKind::residual, 20);
  const Bytes bytes = serialize(model);
  EXPECT_EQ(bytes.size(), 4u + 3u + 2u + 512u * 2u + 2u + 511u * 4u);
  EXPECT_EQ(deserialize_model(bytes), model);
  EXPECT_EQ(test::fnv1a(bytes), 14563947942360291705ull);
}

TEST(Model, DeserializeValidates) {
  const auto model = train_vectors(test::random_vectors(19, 20, 8), SourceKind::intra, 0);
  Bytes good = serialize(model);

  Bytes bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_ERRC(deserialize_model(bad_magic), Errc::bad_magic);

  Bytes dup = good;
  dup[9] = dup[11];  // order[0] := order[1]
  dup[10] = dup[12];
  EXPECT_ERRC(deserialize_model(dup), Errc::invalid_permutation);

  Bytes zero_prob = good;
  zero_prob[9 + 16] = 0;
  zero_prob[9 + 17] = 0;
  EXPECT_ERRC(deserialize_model(zero_prob), Errc::malformed_payload);

  Bytes trailing = good;
  trailing.push_back(0);
  EXPECT_ERRC(deserialize_model(trailing), Errc::malformed_payload);

  EXPECT_ERRC(deserialize_model(std::span(good).first(good.size() - 1)), Errc::malformed_payload);
}

}  // namespace
}  // namespace hatc
