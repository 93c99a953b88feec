#pragma once

#include <stdexcept>
#include <string>

namespace hatc {

enum class Errc {
  image_too_small,
  dimension_mismatch,
  malformed_payload,
  empty_stats,
  same_position,
  invalid_permutation,
  insufficient_data,
  model_mismatch,
  checksum_mismatch,
  out_of_bounds_keypoint,
  malformed_layer,
  no_layers,
  bad_magic,
  truncated,
  duplicate_layer,
  layer_missing,
  empty_input,
  empty_query,
  no_relevant_documents,
  invalid_argument,
  io,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace hatc
