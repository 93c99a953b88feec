#include "hatc/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <string>

#include "parallel.hpp"

namespace hatc {

const char* to_string(Method method) {
  switch (method) {
    case Method::cta: return "CTA";
    case Method::atc: return "ATC";
    case Method::hatc: return "HATC";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "cta") return Method::cta;
  if (lower == "atc") return Method::atc;
  if (lower == "hatc") return Method::hatc;
  throw Error(Errc::invalid_argument, "unknown method '" + std::string(name) + "'");
}

void ModelBank::add(DexelOrderModel model) {
  if (model.source_kind == SourceKind::intra)
    intra_ = std::move(model);
  else
    residual_[model.quality_bucket] = std::move(model);
}

const DexelOrderModel& ModelBank::residual_for(int q) const {
  if (residual_.empty()) throw Error(Errc::model_mismatch, "no residual model loaded");
  const DexelOrderModel* best = nullptr;
  int best_gap = 0;
  for (const auto& [bucket, model] : residual_) {
    const int gap = std::abs(bucket - q);
    if (!best || gap < best_gap) {
      best = &model;
      best_gap = gap;
    }
  }
  return *best;
}

const DexelOrderModel& ModelBank::intra() const {
  if (!intra_) throw Error(Errc::model_mismatch, "no intra model loaded");
  return *intra_;
}

namespace {

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, const Bytes& bytes) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

ModelBank ModelBank::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(Errc::io, "model directory " + dir.string() + " not found");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".hmdl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  ModelBank bank;
  for (const auto& f : files) bank.add(deserialize_model(read_file(f)));
  return bank;
}

void ModelBank::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [bucket, model] : residual_)
    write_file(dir / ("residual_q" + std::to_string(bucket) + ".hmdl"), serialize(model));
  if (intra_) write_file(dir / "intra.hmdl", serialize(*intra_));
}

FeatureSet select_top_z(const FeatureSet& features, std::size_t z) {
  std::vector<std::size_t> idx(features.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return canonical_less(features.keypoints[a], features.keypoints[b]); });
  idx.resize(std::min(z, idx.size()));
  FeatureSet out;
  for (std::size_t i : idx) {
    out.keypoints.push_back(features.keypoints[i]);
    out.descriptors.push_back(features.descriptors[i]);
  }
  return out;
}

std::vector<Keypoint> quantize_locations(std::span<const Keypoint> keypoints, int width, int height, int scale_bits) {
  std::vector<Keypoint> out;
  out.reserve(keypoints.size());
  for (Keypoint kp : keypoints) {
    if (kp.x >= 4u * static_cast<std::uint32_t>(width) || kp.y >= 4u * static_cast<std::uint32_t>(height))
      throw Error(Errc::out_of_bounds_keypoint, "keypoint outside the image");
    kp.scale = static_cast<float>(scale_from_code(scale_code(kp.scale, scale_bits), scale_bits));
    out.push_back(kp);
  }
  return out;
}

namespace {

// Detected keypoints on their transmitted grid whose descriptor support
// fits the frame, canonical order.
std::vector<Keypoint> transmittable_keypoints(const Image& image, int threshold, int scale_bits) {
  const auto detected = detect(image, threshold);
  const auto quantized = quantize_locations(detected, width(image), height(image), scale_bits);
  std::vector<Keypoint> out;
  for (const auto& kp : quantized)
    if (describable(kp, width(image), height(image))) out.push_back(kp);
  return out;
}

Encoded finish(HatcStream stream, FeatureSet features) {
  Encoded enc;
  enc.bytes = mux(stream);
  enc.stream = std::move(stream);
  enc.features = std::move(features);
  return enc;
}

std::vector<Keypoint> decode_layer_keypoints(const HatcStream& stream) {
  if (!stream.location_layer) throw Error(Errc::layer_missing, "location layer missing");
  return decode_locations(*stream.location_layer);
}

}  // namespace

Encoded encode_hatc(const Image& image, const EncodeConfig& config, const DexelOrderModel& model) {
  if (model.source_kind != SourceKind::residual) throw Error(Errc::model_mismatch, "HATC needs a residual model");
  if (model.dimension != kDescriptorBits) throw Error(Errc::model_mismatch, "model dimension differs from descriptor");
  if (config.refine_count < 0) throw Error(Errc::invalid_argument, "refine count must be >= 0");
  const QualityFactor q(config.q);

  HatcStream stream;
  stream.image_layer = encode_image(image, q);
  const Image decoded = decode_image(*stream.image_layer);

  auto keypoints = transmittable_keypoints(image, config.detector_threshold, config.scale_bits);
  if (keypoints.size() > static_cast<std::size_t>(config.refine_count)) keypoints.resize(static_cast<std::size_t>(config.refine_count));

  Described original = describe(image, keypoints);
  const Described predicted = describe(decoded, keypoints);

  std::vector<BitString> residuals;
  residuals.reserve(keypoints.size());
  for (std::size_t i = 0; i < keypoints.size(); ++i)
    residuals.push_back(residual(original.descriptors[i], predicted.descriptors[i]));

  stream.enhancement_layer = encode_block(residuals, model);
  stream.location_layer = encode_locations(keypoints, width(image), height(image), config.scale_bits);
  return finish(std::move(stream), {std::move(original.keypoints), std::move(original.descriptors)});
}

DecodedResult decode_hatc(std::span<const std::uint8_t> bytes, const DexelOrderModel& model) {
  HatcStream stream = demux(bytes);
  if (!stream.image_layer || !stream.location_layer || !stream.enhancement_layer)
    throw Error(Errc::layer_missing, "HATC decoding needs image, location and enhancement layers");
  DecodedResult result;
  result.rate = stream.layer_sizes;
  result.image = decode_image(*stream.image_layer);
  const auto keypoints = decode_layer_keypoints(stream);
  Described predicted = describe(*result.image, keypoints);
  if (!predicted.dropped.empty()) throw Error(Errc::malformed_layer, "transmitted keypoint cannot be described");
  const auto residuals = decode_block(*stream.enhancement_layer, model);
  if (residuals.size() != predicted.descriptors.size())
    throw Error(Errc::malformed_payload, "enhancement layer count differs from location layer");
  result.features.keypoints = std::move(predicted.keypoints);
  for (std::size_t i = 0; i < residuals.size(); ++i)
    result.features.descriptors.push_back(apply_residual(predicted.descriptors[i], residuals[i]));
  return result;
}

DecodedResult decode_hatc(std::span<const std::uint8_t> bytes, const ModelBank& models) {
  const HatcStream stream = demux(bytes);
  if (!stream.enhancement_layer) throw Error(Errc::layer_missing, "enhancement layer missing");
  return decode_hatc(bytes, models.residual_for(stream.enhancement_layer->quality_bucket));
}

Encoded encode_cta(const Image& image, int q) {
  HatcStream stream;
  stream.image_layer = encode_image(image, QualityFactor(q));
  return finish(std::move(stream), {});
}

DecodedResult decode_cta(std::span<const std::uint8_t> bytes, int threshold) {
  const HatcStream stream = demux(bytes);
  if (!stream.image_layer) throw Error(Errc::layer_missing, "image layer missing");
  DecodedResult result;
  result.rate = stream.layer_sizes;
  result.image = decode_image(*stream.image_layer);
  result.features = extract(*result.image, threshold);
  return result;
}

Encoded encode_atc(const Image& image, int threshold, const DexelOrderModel& intra_model, int scale_bits) {
  if (intra_model.source_kind != SourceKind::intra) throw Error(Errc::model_mismatch, "ATC needs an intra model");
  const auto keypoints = transmittable_keypoints(image, threshold, scale_bits);
  Described described = describe(image, keypoints);
  HatcStream stream;
  stream.location_layer = encode_locations(keypoints, width(image), height(image), scale_bits);
  stream.enhancement_layer = encode_block(described.descriptors, intra_model);
  return finish(std::move(stream), {std::move(described.keypoints), std::move(described.descriptors)});
}

DecodedResult decode_atc(std::span<const std::uint8_t> bytes, const DexelOrderModel& intra_model) {
  const HatcStream stream = demux(bytes);
  if (!stream.enhancement_layer) throw Error(Errc::layer_missing, "descriptor layer missing");
  DecodedResult result;
  result.rate = stream.layer_sizes;
  result.features.keypoints = decode_layer_keypoints(stream);
  result.features.descriptors = decode_block(*stream.enhancement_layer, intra_model);
  if (result.features.descriptors.size() != result.features.keypoints.size())
    throw Error(Errc::malformed_payload, "descriptor count differs from location layer");
  return result;
}

std::vector<std::pair<BitString, BitString>> descriptor_pairs(const Image& image, int q, int threshold, int scale_bits) {
  const Image decoded = decode_image(encode_image(image, QualityFactor(q)));
  const auto keypoints = transmittable_keypoints(image, threshold, scale_bits);
  const Described original = describe(image, keypoints);
  const Described predicted = describe(decoded, keypoints);
  std::vector<std::pair<BitString, BitString>> pairs;
  pairs.reserve(keypoints.size());
  for (std::size_t i = 0; i < keypoints.size(); ++i) pairs.emplace_back(original.descriptors[i], predicted.descriptors[i]);
  return pairs;
}

std::vector<BitString> intra_descriptors(const Image& image, int threshold, int scale_bits) {
  return describe(image, transmittable_keypoints(image, threshold, scale_bits)).descriptors;
}

ModelBank train_bank(std::span<const Image> images, std::span<const int> qs, int threshold, int scale_bits, int jobs) {
  if (images.size() < 2) throw Error(Errc::insufficient_data, "training needs at least two images");
  ModelBank bank;
  for (int q : qs) {
    std::vector<std::vector<std::pair<BitString, BitString>>> per_image(images.size());
    detail::parallel_for(images.size(), jobs,
                         [&](std::size_t i) { per_image[i] = descriptor_pairs(images[i], q, threshold, scale_bits); });
    std::vector<std::pair<BitString, BitString>> pairs;
    for (auto& v : per_image) pairs.insert(pairs.end(), v.begin(), v.end());
    bank.add(train(pairs, SourceKind::residual, q));
  }
  std::vector<std::vector<BitString>> per_image(images.size());
  detail::parallel_for(images.size(), jobs,
                       [&](std::size_t i) { per_image[i] = intra_descriptors(images[i], threshold, scale_bits); });
  std::vector<BitString> vectors;
  for (auto& v : per_image) vectors.insert(vectors.end(), v.begin(), v.end());
  bank.add(train_vectors(vectors, SourceKind::intra, 0));
  return bank;
}

Encoded encode(const Image& image, const EncodeConfig& config, const ModelBank& models) {
  switch (config.method) {
    case Method::cta: return encode_cta(image, config.q);
    case Method::atc: return encode_atc(image, config.detector_threshold, models.intra(), config.scale_bits);
    case Method::hatc: return encode_hatc(image, config, models.residual_for(config.q));
  }
  throw Error(Errc::invalid_argument, "unknown method");
}

DecodedResult decode(std::span<const std::uint8_t> bytes, const ModelBank& models, int threshold) {
  const HatcStream stream = demux(bytes);
  if (stream.image_layer && !stream.location_layer && !stream.enhancement_layer) return decode_cta(bytes, threshold);
  if (!stream.image_layer) return decode_atc(bytes, models.intra());
  return decode_hatc(bytes, models);
}

}  // namespace hatc
