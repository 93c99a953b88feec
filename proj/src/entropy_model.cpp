#include "hatc/entropy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hatc {

DexelStats::DexelStats(int dimension)
    : dimension_(dimension),
      ones_(Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>::Zero(dimension)),
      co_(Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(dimension, dimension)) {
  if (dimension <= 0) throw Error(Errc::invalid_argument, "dimension must be positive");
}

Eigen::Matrix<std::int64_t, 2, 2> DexelStats::joint(int j1, int j2) const {
  const std::int64_t n11 = co_(j1, j2);
  const std::int64_t n1x = ones_(j1), nx1 = ones_(j2);
  Eigen::Matrix<std::int64_t, 2, 2> t;
  t(1, 1) = n11;
  t(1, 0) = n1x - n11;
  t(0, 1) = nx1 - n11;
  t(0, 0) = samples_ - n1x - nx1 + n11;
  return t;
}

void DexelStats::accumulate(const BitString& vector) {
  if (vector.size() != dimension_) throw Error(Errc::dimension_mismatch, "vector length differs from stats dimension");
  std::vector<int> set;
  for (int j = 0; j < dimension_; ++j)
    if (vector.test(j)) set.push_back(j);
  for (int a : set) {
    ones_(a) += 1;
    for (int b : set) co_(a, b) += 1;
  }
  ++samples_;
}

void DexelStats::accumulate(std::span<const BitString> vectors) {
  // Co-occurrence counts as B^T B over row blocks; entries stay far below 2^53.
  constexpr std::size_t kBlock = 4096;
  for (std::size_t start = 0; start < vectors.size(); start += kBlock) {
    const std::size_t rows = std::min(kBlock, vectors.size() - start);
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), dimension_);
    for (std::size_t r = 0; r < rows; ++r) {
      const BitString& v = vectors[start + r];
      if (v.size() != dimension_) throw Error(Errc::dimension_mismatch, "vector length differs from stats dimension");
      for (int j = 0; j < dimension_; ++j)
        if (v.test(j)) block(static_cast<Eigen::Index>(r), j) = 1.0;
    }
    const Eigen::MatrixXd gram = block.transpose() * block;
    co_ += gram.array().round().cast<std::int64_t>().matrix();
    ones_ += block.colwise().sum().transpose().array().round().cast<std::int64_t>().matrix();
    samples_ += static_cast<std::int64_t>(rows);
  }
}

void DexelStats::merge(const DexelStats& other) {
  if (other.dimension_ != dimension_) throw Error(Errc::dimension_mismatch, "cannot merge stats of different dimension");
  samples_ += other.samples_;
  ones_ += other.ones_;
  co_ += other.co_;
}

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

double conditional_entropy(const Eigen::Matrix<std::int64_t, 2, 2>& joint) {
  const double n = static_cast<double>(joint.sum());
  if (n <= 0.0) throw Error(Errc::empty_stats, "no samples");
  double h = 0.0;
  for (int y = 0; y < 2; ++y) {
    const double py = static_cast<double>(joint(0, y) + joint(1, y)) / n;
    for (int x = 0; x < 2; ++x) {
      const double pxy = static_cast<double>(joint(x, y)) / n;
      if (pxy > 0.0) h += pxy * std::log2(py / pxy);
    }
  }
  return std::max(0.0, h);
}

namespace {

void require_samples(const DexelStats& stats) {
  if (stats.sample_count() <= 0) throw Error(Errc::empty_stats, "statistics hold no samples");
}

void require_position(const DexelStats& stats, int j) {
  if (j < 0 || j >= stats.dimension()) throw Error(Errc::invalid_argument, "dexel position out of range");
}

}  // namespace

double marginal_entropy(const DexelStats& stats, int j) {
  require_samples(stats);
  require_position(stats, j);
  return binary_entropy(static_cast<double>(stats.ones(j)) / static_cast<double>(stats.sample_count()));
}

double conditional_entropy(const DexelStats& stats, int j1, int j2) {
  require_samples(stats);
  require_position(stats, j1);
  require_position(stats, j2);
  if (j1 == j2) throw Error(Errc::same_position, "conditioning a dexel on itself");
  return conditional_entropy(stats.joint(j1, j2));
}

std::vector<int> greedy_order(const DexelStats& stats) {
  require_samples(stats);
  const int d = stats.dimension();
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(d));
  std::vector<bool> used(static_cast<std::size_t>(d), false);

  int first = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < d; ++j) {
    const double h = marginal_entropy(stats, j);
    if (h < best) {
      best = h;
      first = j;
    }
  }
  order.push_back(first);
  used[static_cast<std::size_t>(first)] = true;

  while (static_cast<int>(order.size()) < d) {
    const int prev = order.back();
    int next = -1;
    best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < d; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double h = conditional_entropy(stats.joint(j, prev));
      if (h < best) {
        best = h;
        next = j;
      }
    }
    order.push_back(next);
    used[static_cast<std::size_t>(next)] = true;
  }
  return order;
}

std::vector<int> identity_order(int dimension) {
  std::vector<int> order(static_cast<std::size_t>(dimension));
  for (int j = 0; j < dimension; ++j) order[static_cast<std::size_t>(j)] = j;
  return order;
}

void validate_permutation(std::span<const int> order, int dimension) {
  if (static_cast<int>(order.size()) != dimension) throw Error(Errc::invalid_permutation, "order has the wrong length");
  std::vector<bool> seen(static_cast<std::size_t>(dimension), false);
  for (int j : order) {
    if (j < 0 || j >= dimension || seen[static_cast<std::size_t>(j)])
      throw Error(Errc::invalid_permutation, "order is not a permutation");
    seen[static_cast<std::size_t>(j)] = true;
  }
}

double chain_bound(const DexelStats& stats, std::span<const int> order) {
  require_samples(stats);
  validate_permutation(order, stats.dimension());
  double bits = marginal_entropy(stats, order[0]);
  for (std::size_t k = 1; k < order.size(); ++k) bits += conditional_entropy(stats.joint(order[k], order[k - 1]));
  return bits;
}

namespace {

// round(65536 * (ones + 1) / (total + 2)), kept inside [1, 65535].
std::uint16_t smoothed_q16(std::int64_t ones, std::int64_t total) {
  const std::int64_t num = 2 * (ones + 1) * static_cast<std::int64_t>(kProbOne) + (total + 2);
  const std::int64_t q = num / (2 * (total + 2));
  return static_cast<std::uint16_t>(std::clamp<std::int64_t>(q, 1, kProbOne - 1));
}

}  // namespace

DexelOrderModel build_model(const DexelStats& stats, std::span<const int> order, SourceKind kind,
                            std::uint8_t quality_bucket) {
  validate_permutation(order, stats.dimension());
  DexelOrderModel model;
  model.dimension = stats.dimension();
  model.order.assign(order.begin(), order.end());
  model.source_kind = kind;
  model.quality_bucket = quality_bucket;
  model.first_prob = smoothed_q16(stats.ones(order[0]), stats.sample_count());
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto t = stats.joint(order[k], order[k - 1]);
    model.cond_probs.push_back({smoothed_q16(t(1, 0), t(0, 0) + t(1, 0)), smoothed_q16(t(1, 1), t(0, 1) + t(1, 1))});
  }
  return model;
}

DexelOrderModel train_vectors(std::span<const BitString> vectors, SourceKind kind, int q) {
  if (vectors.size() < 2) throw Error(Errc::insufficient_data, "training needs at least two vectors");
  DexelStats stats(vectors.front().size());
  stats.accumulate(vectors);
  return build_model(stats, greedy_order(stats), kind, static_cast<std::uint8_t>(kind == SourceKind::intra ? 0 : q));
}

DexelOrderModel train(std::span<const std::pair<BitString, BitString>> pairs, SourceKind kind, int q) {
  std::vector<BitString> vectors;
  vectors.reserve(pairs.size());
  for (const auto& [original, lossy] : pairs) vectors.push_back(kind == SourceKind::residual ? original ^ lossy : original);
  return train_vectors(vectors, kind, q);
}

double code_length(const DexelOrderModel& model, const BitString& vector) {
  if (vector.size() != model.dimension) throw Error(Errc::dimension_mismatch, "vector length differs from model");
  auto cost = [](std::uint16_t p1, bool bit) {
    const double p = static_cast<double>(p1) / kProbOne;
    return -std::log2(bit ? p : 1.0 - p);
  };
  bool prev = vector.test(model.order[0]);
  double bits = cost(model.first_prob, prev);
  for (std::size_t k = 1; k < model.order.size(); ++k) {
    const bool bit = vector.test(model.order[k]);
    bits += cost(model.cond_probs[k - 1][prev ? 1 : 0], bit);
    prev = bit;
  }
  return bits;
}

Bytes serialize(const DexelOrderModel& model) {
  Bytes out;
  ByteWriter w(out);
  w.magic("HMDL");
  w.u8(1);
  w.u8(static_cast<std::uint8_t>(model.source_kind));
  w.u8(model.quality_bucket);
  w.u16(static_cast<std::uint16_t>(model.dimension));
  for (int j : model.order) w.u16(static_cast<std::uint16_t>(j));
  w.u16(model.first_prob);
  for (const auto& c : model.cond_probs) {
    w.u16(c[0]);
    w.u16(c[1]);
  }
  return out;
}

DexelOrderModel deserialize_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, Errc::malformed_payload);
  if (!r.magic("HMDL")) throw Error(Errc::bad_magic, "not a model file");
  if (r.u8() != 1) throw Error(Errc::malformed_payload, "unsupported model version");
  DexelOrderModel model;
  const std::uint8_t kind = r.u8();
  if (kind > 1) throw Error(Errc::malformed_payload, "unknown source kind");
  model.source_kind = static_cast<SourceKind>(kind);
  model.quality_bucket = r.u8();
  model.dimension = r.u16();
  if (model.dimension == 0) throw Error(Errc::malformed_payload, "zero model dimension");
  for (int j = 0; j < model.dimension; ++j) model.order.push_back(r.u16());
  validate_permutation(model.order, model.dimension);
  model.first_prob = r.u16();
  for (int k = 1; k < model.dimension; ++k) {
    const std::uint16_t p0 = r.u16();
    const std::uint16_t p1 = r.u16();
    model.cond_probs.push_back({p0, p1});
  }
  auto valid = [](std::uint16_t p) { return p != 0; };
  if (!valid(model.first_prob)) throw Error(Errc::malformed_payload, "zero probability in model");
  for (const auto& c : model.cond_probs)
    if (!valid(c[0]) || !valid(c[1])) throw Error(Errc::malformed_payload, "zero probability in model");
  if (r.remaining() != 0) throw Error(Errc::malformed_payload, "trailing bytes after model");
  return model;
}

}  // namespace hatc
