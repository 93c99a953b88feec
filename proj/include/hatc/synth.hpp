#pragma once

#include <cstdint>
#include <filesystem>

#include "hatc/image.hpp"

namespace hatc {

inline constexpr int kMinSynthSide = 32;

// Synthetic retrieval corpus: each object is a random planar scene, every
// database or query image a perturbed view of it (rotation, zoom, shift,
// gain, offset, sensor noise). Training scenes share no seed with objects.
struct SynthOptions {
  std::uint64_t seed = 1;
  int objects = 20;
  int db_views = 5;
  int query_views = 1;
  int train_images = 40;
  int width = 256;
  int height = 192;
};

// Scene canvas, 1.5x the view size in each direction. Surfaces come from the
// material palette drawn from `palette_seed`.
Image render_scene(std::uint64_t seed, std::uint64_t palette_seed, int width, int height);

// Perturbed view of `scene` around the canvas centre, drawn from `seed`.
Image render_view(const Image& scene, std::uint64_t seed, int width, int height);

// Writes db/, query/, train/ and manifest.txt below `dir`; returns the
// manifest path. Outputs are a pure function of the options.
std::filesystem::path synthesize_corpus(const std::filesystem::path& dir, const SynthOptions& options);

}  // namespace hatc
