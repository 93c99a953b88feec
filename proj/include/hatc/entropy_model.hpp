#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hatc/bitstring.hpp"
#include "hatc/bytes.hpp"

namespace hatc {

// Dexel occurrence counts. Joint 2x2 tables for any ordered pair follow from
// the per-position ones count and the symmetric co-occurrence matrix.
class DexelStats {
 public:
  explicit DexelStats(int dimension);

  int dimension() const { return dimension_; }
  std::int64_t sample_count() const { return samples_; }
  std::int64_t ones(int j) const { return ones_(j); }
  std::int64_t zeros(int j) const { return samples_ - ones_(j); }
  // joint(x, y) = #{samples with bit j1 == x and bit j2 == y}.
  Eigen::Matrix<std::int64_t, 2, 2> joint(int j1, int j2) const;

  void accumulate(const BitString& vector);
  void accumulate(std::span<const BitString> vectors);
  void merge(const DexelStats& other);

 private:
  int dimension_;
  std::int64_t samples_ = 0;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> ones_;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> co_;
};

inline DexelStats accumulate(DexelStats stats, const BitString& vector) {
  stats.accumulate(vector);
  return stats;
}

double marginal_entropy(const DexelStats& stats, int j);
double conditional_entropy(const DexelStats& stats, int j1, int j2);

// Entropy of a binary source with P(1) = p, 0 log 0 := 0.
double binary_entropy(double p);
// Entropy of the conditional source described by a 2x2 joint count table
// (rows: value of the predicted dexel, columns: value of the context dexel).
double conditional_entropy(const Eigen::Matrix<std::int64_t, 2, 2>& joint);

std::vector<int> greedy_order(const DexelStats& stats);
std::vector<int> identity_order(int dimension);
void validate_permutation(std::span<const int> order, int dimension);
double chain_bound(const DexelStats& stats, std::span<const int> order);

enum class SourceKind : std::uint8_t { residual = 0, intra = 1 };

inline constexpr int kProbBits = 16;
inline constexpr std::uint32_t kProbOne = 1u << kProbBits;

struct DexelOrderModel {
  int dimension = 0;
  std::vector<int> order;  // 0-based positions in coding order
  std::uint16_t first_prob = kProbOne / 2;  // P(bit = 1) at order[0], Q16
  // cond_probs[k][prev] = P(bit = 1) at order[k + 1] given the bit at order[k].
  std::vector<std::array<std::uint16_t, 2>> cond_probs;
  SourceKind source_kind = SourceKind::residual;
  std::uint8_t quality_bucket = 0;

  friend bool operator==(const DexelOrderModel&, const DexelOrderModel&) = default;
};

// Add-one smoothed, Q16 probabilities under `order`.
DexelOrderModel build_model(const DexelStats& stats, std::span<const int> order, SourceKind kind,
                            std::uint8_t quality_bucket);

DexelOrderModel train(std::span<const std::pair<BitString, BitString>> pairs, SourceKind kind, int q);
DexelOrderModel train_vectors(std::span<const BitString> vectors, SourceKind kind, int q);

// Ideal code length of `vector` under the model, in bits.
double code_length(const DexelOrderModel& model, const BitString& vector);

// "HMDL", version 1, little-endian; see README.
Bytes serialize(const DexelOrderModel& model);
DexelOrderModel deserialize_model(std::span<const std::uint8_t> bytes);

}  // namespace hatc
