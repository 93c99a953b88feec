#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hatc/container.hpp"
#include "hatc/entropy_model.hpp"
#include "hatc/features.hpp"
#include "hatc/image.hpp"

namespace hatc {

enum class Method { cta, atc, hatc };

const char* to_string(Method method);
Method parse_method(std::string_view name);

inline constexpr int kDefaultDetectorThreshold = 30;

struct EncodeConfig {
  Method method = Method::hatc;
  int q = 50;                                    // CTA, HATC
  int detector_threshold = kDefaultDetectorThreshold;  // ATC sweep knob; HATC detection
  int refine_count = 50;                         // HATC Z
  int scale_bits = kDefaultScaleBits;
};

struct Encoded {
  Bytes bytes;
  HatcStream stream;
  // Encoder-side features carried by the stream: the refined originals for
  // HATC, the intra-coded set for ATC, empty for CTA.
  FeatureSet features;
};

struct DecodedResult {
  std::optional<Image> image;
  FeatureSet features;
  LayerSizes rate;
};

// Trained models: residual models keyed by quality bucket plus one intra model.
class ModelBank {
 public:
  void add(DexelOrderModel model);
  const DexelOrderModel& residual_for(int q) const;  // nearest bucket, lower on ties
  const DexelOrderModel& intra() const;
  bool has_residual() const { return !residual_.empty(); }
  bool has_intra() const { return intra_.has_value(); }
  const std::map<int, DexelOrderModel>& residual_models() const { return residual_; }

  // Loads every *.hmdl file in `dir`.
  static ModelBank load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;

 private:
  std::map<int, DexelOrderModel> residual_;
  std::optional<DexelOrderModel> intra_;
};

FeatureSet select_top_z(const FeatureSet& features, std::size_t z);

// Keypoints after a trip through the location layer.
std::vector<Keypoint> quantize_locations(std::span<const Keypoint> keypoints, int width, int height, int scale_bits);

Encoded encode_hatc(const Image& image, const EncodeConfig& config, const DexelOrderModel& model);
DecodedResult decode_hatc(std::span<const std::uint8_t> bytes, const DexelOrderModel& model);
DecodedResult decode_hatc(std::span<const std::uint8_t> bytes, const ModelBank& models);

Encoded encode_cta(const Image& image, int q);
DecodedResult decode_cta(std::span<const std::uint8_t> bytes, int threshold);

Encoded encode_atc(const Image& image, int threshold, const DexelOrderModel& intra_model,
                   int scale_bits = kDefaultScaleBits);
DecodedResult decode_atc(std::span<const std::uint8_t> bytes, const DexelOrderModel& intra_model);

// (original, decoded-image) descriptor pairs at every transmittable keypoint
// of `image` after a round trip through the image codec at `q`.
std::vector<std::pair<BitString, BitString>> descriptor_pairs(const Image& image, int q, int threshold,
                                                              int scale_bits = kDefaultScaleBits);

// Original-image descriptors at every transmittable keypoint.
std::vector<BitString> intra_descriptors(const Image& image, int threshold, int scale_bits = kDefaultScaleBits);

// One residual model per entry of `qs` plus the intra model, from `images`.
ModelBank train_bank(std::span<const Image> images, std::span<const int> qs, int threshold,
                     int scale_bits = kDefaultScaleBits, int jobs = 1);

// Dispatch on config.method; models needed by the method must be present.
Encoded encode(const Image& image, const EncodeConfig& config, const ModelBank& models);
// `threshold` is the sink-side detector threshold used by CTA.
DecodedResult decode(std::span<const std::uint8_t> bytes, const ModelBank& models, int threshold);

}  // namespace hatc
