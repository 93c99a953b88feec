#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hatc/features.hpp"
#include "hatc/image.hpp"
#include "hatc/pipeline.hpp"

namespace hatc {

// One descriptor per row, 64-bit words.
using PackedDescriptors = Plane<std::uint64_t>;

PackedDescriptors pack(std::span<const BitString> descriptors);

// Ratio-test matching; see README for the rule set.
inline constexpr int kRatioNumerator = 4;    // nearest <= 0.8 * second
inline constexpr int kRatioDenominator = 5;
inline constexpr int kSingleCandidateCap = 64;

struct MatchScore {
  int matches = 0;
  std::int64_t distance_sum = 0;  // nearest distances of accepted matches

  friend bool operator==(const MatchScore&, const MatchScore&) = default;
};

// True if `a` ranks strictly above `b`.
bool ranks_above(const MatchScore& a, const MatchScore& b);

MatchScore match_score(const PackedDescriptors& query, const PackedDescriptors& candidate);
MatchScore match_score(const FeatureSet& query, const FeatureSet& candidate);

struct DatabaseEntry {
  std::string id;
  std::string object;
  PackedDescriptors descriptors;
};

struct RankedList {
  std::string query_id;
  std::vector<std::string> entries;

  std::size_t length() const { return entries.size(); }
};

// Scores every entry and orders by score, then id, so the ranking does not
// depend on database enumeration order.
RankedList rank(const std::string& query_id, const PackedDescriptors& query, std::span<const DatabaseEntry> database);

double average_precision(const RankedList& ranked, const std::set<std::string>& relevant);
double mean_average_precision(std::span<const double> aps);

struct CorpusRecord {
  std::filesystem::path path;
  std::string object;
};

struct Corpus {
  std::vector<CorpusRecord> database;
  std::vector<CorpusRecord> queries;
};

// Manifest lines: "<db|query> <path> <object id>"; '#' starts a comment.
// Relative paths resolve against the manifest directory.
Corpus load_manifest(const std::filesystem::path& manifest);

struct SweepGrid {
  std::vector<int> cta_q{5, 10, 15, 20, 50, 70};
  std::vector<int> atc_thresholds{70, 75, 80, 85, 90, 95, 100, 105};
  std::vector<int> hatc_q{5, 10, 15, 20, 50, 70};
  std::vector<int> hatc_z{25, 50, 100, 150};
  int detector_threshold = kDefaultDetectorThreshold;
  int scale_bits = kDefaultScaleBits;

  std::size_t size() const { return cta_q.size() + atc_thresholds.size() + hatc_q.size() * hatc_z.size(); }
};

struct RateAccuracyPoint {
  Method method = Method::cta;
  std::optional<int> q;
  int threshold = 0;
  std::optional<int> refine_z;
  // Mean bytes per query.
  double bytes_image = 0;
  double bytes_loc = 0;
  double bytes_enh = 0;
  double bytes_total = 0;
  std::optional<double> psnr_db;
  double map = 0;
};

struct SweepOptions {
  int jobs = 1;
  std::ostream* log = nullptr;
};

std::vector<RateAccuracyPoint> sweep(const Corpus& corpus, const SweepGrid& grid, const ModelBank& models,
                                     const SweepOptions& options = {});

void write_csv(std::ostream& out, std::span<const RateAccuracyPoint> points);

// rate-map.svg, rate-psnr.svg and map-psnr-iso-rate.svg.
void write_svgs(const std::filesystem::path& dir, std::span<const RateAccuracyPoint> points);

}  // namespace hatc
