#include "hatc/error.hpp"

namespace hatc {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::image_too_small: return "image-too-small";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::malformed_payload: return "malformed-payload";
    case Errc::empty_stats: return "empty-stats";
    case Errc::same_position: return "same-position";
    case Errc::invalid_permutation: return "invalid-permutation";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::model_mismatch: return "model-mismatch";
    case Errc::checksum_mismatch: return "checksum-mismatch";
    case Errc::out_of_bounds_keypoint: return "out-of-bounds-keypoint";
    case Errc::malformed_layer: return "malformed-layer";
    case Errc::no_layers: return "no-layers";
    case Errc::bad_magic: return "bad-magic";
    case Errc::truncated: return "truncated";
    case Errc::duplicate_layer: return "duplicate-layer";
    case Errc::layer_missing: return "layer-missing";
    case Errc::empty_input: return "empty-input";
    case Errc::empty_query: return "empty-query";
    case Errc::no_relevant_documents: return "no-relevant-documents";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::io: return "io";
  }
  return "unknown";
}

}  // namespace hatc
