// hatc command-line front end: synth-corpus, train, encode, decode, sweep.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hatc/descriptor_coder.hpp"
#include "hatc/features.hpp"
#include "hatc/image_codec.hpp"
#include "hatc/pipeline.hpp"
#include "hatc/retrieval.hpp"
#include "hatc/synth.hpp"

namespace fs = std::filesystem;
using namespace hatc;

namespace {

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io, "cannot write " + tmp);
  }
  fs::rename(tmp, path);
}

void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

Bytes read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::io, "corpus directory " + dir.string() + " not found");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".pgm") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

struct Options {
  std::string method = "hatc";
  int q = 50;
  int threshold = kDefaultDetectorThreshold;
  int z = 50;
  int scale_bits = kDefaultScaleBits;
  std::string model;
  std::string manifest;
  std::string out;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string input;
  std::string kind = "all";
  std::vector<int> q_list{5, 10, 15, 20, 50, 70};
  SynthOptions synth;
};

int cmd_synth(const Options& o) {
  SynthOptions s = o.synth;
  s.seed = o.seed;
  const auto manifest = synthesize_corpus(o.out, s);
  std::cout << "wrote " << manifest.string() << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  const auto paths = list_images(o.input);
  std::vector<Image> images(paths.size());
  std::transform(paths.begin(), paths.end(), images.begin(), [](const fs::path& p) { return read_pgm(p); });
  if (images.size() < 2) throw Error(Errc::insufficient_data, "training needs at least two readable images");

  ModelBank bank;
  const bool residual = o.kind == "all" || o.kind == "residual";
  const bool intra = o.kind == "all" || o.kind == "intra";
  if (!residual && !intra) throw Error(Errc::invalid_argument, "--kind must be residual, intra or all");
  auto summarize = [&](const DexelOrderModel& model, std::span<const BitString> vectors) {
    DexelStats stats(model.dimension);
    stats.accumulate(vectors);
    std::printf("%-8s q=%-3d vectors=%-6zu chain_bound=%.2f bits identity=%.2f bits\n",
                model.source_kind == SourceKind::intra ? "intra" : "residual", model.quality_bucket, vectors.size(),
                chain_bound(stats, model.order), chain_bound(stats, identity_order(model.dimension)));
  };
  if (residual)
    for (int q : o.q_list) {
      std::vector<BitString> vectors;
      for (const auto& img : images)
        for (const auto& [a, b] : descriptor_pairs(img, q, o.threshold, o.scale_bits)) vectors.push_back(a ^ b);
      auto model = train_vectors(vectors, SourceKind::residual, q);
      summarize(model, vectors);
      bank.add(std::move(model));
    }
  if (intra) {
    std::vector<BitString> vectors;
    for (const auto& img : images) {
      auto v = intra_descriptors(img, o.threshold, o.scale_bits);
      vectors.insert(vectors.end(), v.begin(), v.end());
    }
    auto model = train_vectors(vectors, SourceKind::intra, 0);
    summarize(model, vectors);
    bank.add(std::move(model));
  }
  bank.save(o.out);
  return 0;
}

ModelBank load_models(const Options& o, bool required) {
  if (o.model.empty()) {
    if (required) throw Error(Errc::model_mismatch, "this method needs --model <dir>");
    return {};
  }
  return ModelBank::load(o.model);
}

int cmd_encode(const Options& o) {
  EncodeConfig config;
  config.method = parse_method(o.method);
  config.q = o.q;
  config.detector_threshold = o.threshold;
  config.refine_count = o.z;
  config.scale_bits = o.scale_bits;
  const auto models = load_models(o, config.method != Method::cta);
  const Encoded enc = encode(read_pgm(o.input), config, models);
  write_bytes(o.out, enc.bytes);
  const auto& r = enc.stream.layer_sizes;
  std::printf("%s: %zu bytes (image %zu, location %zu, enhancement %zu, container %zu), %zu features\n",
              to_string(config.method), enc.bytes.size(), r.image, r.location, r.enhancement, r.container,
              enc.features.size());
  return 0;
}

int cmd_decode(const Options& o) {
  const Bytes bytes = read_bytes(o.input);
  const HatcStream stream = demux(bytes);
  const bool needs_models = stream.enhancement_layer.has_value();
  const auto models = load_models(o, needs_models);
  const DecodedResult dec = decode(bytes, models, o.threshold);
  const fs::path prefix(o.out);
  if (dec.image) {
    const fs::path pgm = prefix.string() + ".pgm";
    const auto tmp = fs::path(pgm.string() + ".tmp");
    if (pgm.has_parent_path()) fs::create_directories(pgm.parent_path());
    write_pgm(tmp, *dec.image);
    fs::rename(tmp, pgm);
  }
  write_bytes(prefix.string() + ".hfts", serialize(dec.features));
  std::ostringstream rate;
  rate << "image " << dec.rate.image << "\nlocation " << dec.rate.location << "\nenhancement " << dec.rate.enhancement
       << "\ncontainer " << dec.rate.container << "\ntotal " << dec.rate.total() << "\nfeatures " << dec.features.size()
       << '\n';
  write_text(prefix.string() + ".rate.txt", rate.str());
  std::cout << rate.str();
  return 0;
}

int cmd_sweep(const Options& o) {
  const Corpus corpus = load_manifest(o.manifest);
  const ModelBank models = ModelBank::load(o.model);
  SweepGrid grid;
  grid.detector_threshold = o.threshold;
  grid.scale_bits = o.scale_bits;
  SweepOptions options;
  options.jobs = o.jobs;
  options.log = &std::cerr;
  const auto points = sweep(corpus, grid, models, options);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  std::ostringstream csv;
  write_csv(csv, points);
  write_text(dir / "sweep.csv", csv.str());
  write_svgs(dir, points);

  std::printf("%-6s %4s %4s %4s %10s %8s %8s\n", "method", "q", "t", "z", "KB/query", "PSNR", "MAP");
  for (const auto& p : points)
    std::printf("%-6s %4s %4d %4s %10.3f %8s %8.4f\n", to_string(p.method), p.q ? std::to_string(*p.q).c_str() : "-",
                p.threshold, p.refine_z ? std::to_string(*p.refine_z).c_str() : "-", p.bytes_total / 1024.0,
                p.psnr_db ? std::to_string(*p.psnr_db).substr(0, 6).c_str() : "-", p.map);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"HATC joint image and binary-feature codec"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth-corpus", "Generate the synthetic retrieval corpus");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--seed", o.seed, "Corpus seed");
  synth->add_option("--objects", o.synth.objects, "Number of objects")->check(CLI::PositiveNumber);
  synth->add_option("--db-views", o.synth.db_views, "Database views per object")->check(CLI::PositiveNumber);
  synth->add_option("--train-images", o.synth.train_images, "Training images")->check(CLI::NonNegativeNumber);
  synth->add_option("--width", o.synth.width, "View width")->check(CLI::Range(kMinSynthSide, 4096));
  synth->add_option("--height", o.synth.height, "View height")->check(CLI::Range(kMinSynthSide, 4096));

  auto* train = app.add_subcommand("train", "Train dexel order models from a directory of PGM images");
  train->add_option("corpus", o.input, "Directory of training images")->required();
  train->add_option("--q", o.q_list, "Quality factors for residual models")->delimiter(',');
  train->add_option("--kind", o.kind, "residual, intra or all")->check(CLI::IsMember({"residual", "intra", "all"}));
  train->add_option("--out", o.out, "Model directory")->required();
  train->add_option("--threshold", o.threshold, "Detector threshold")->check(CLI::Range(0, 255));
  train->add_option("--scale-bits", o.scale_bits, "Scale code bits")->check(CLI::Range(1, 16));

  auto* encode_cmd = app.add_subcommand("encode", "Encode a PGM image");
  encode_cmd->add_option("input", o.input, "Input PGM")->required();
  encode_cmd->add_option("--method", o.method, "cta, atc or hatc")->check(CLI::IsMember({"cta", "atc", "hatc"}));
  encode_cmd->add_option("--q", o.q, "JPEG-style quality factor")->check(CLI::Range(1, 100));
  encode_cmd->add_option("--threshold", o.threshold, "Detector threshold")->check(CLI::Range(0, 255));
  encode_cmd->add_option("--z", o.z, "Refined feature count")->check(CLI::NonNegativeNumber);
  encode_cmd->add_option("--scale-bits", o.scale_bits, "Scale code bits")->check(CLI::Range(1, 16));
  encode_cmd->add_option("--model", o.model, "Model directory");
  encode_cmd->add_option("--out", o.out, "Output stream")->required();

  auto* decode_cmd = app.add_subcommand("decode", "Decode a stream");
  decode_cmd->add_option("input", o.input, "Input stream")->required();
  decode_cmd->add_option("--model", o.model, "Model directory");
  decode_cmd->add_option("--threshold", o.threshold, "Sink-side detector threshold (CTA)")->check(CLI::Range(0, 255));
  decode_cmd->add_option("--out", o.out, "Output prefix (.pgm, .hfts, .rate.txt)")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Rate-accuracy sweep over the default grid");
  sweep_cmd->add_option("--manifest", o.manifest, "Corpus manifest")->required();
  sweep_cmd->add_option("--model", o.model, "Model directory")->required();
  sweep_cmd->add_option("--out", o.out, "Output directory (sweep.csv and SVGs)")->required();
  sweep_cmd->add_option("--threshold", o.threshold, "Detector threshold for CTA and HATC")->check(CLI::Range(0, 255));
  sweep_cmd->add_option("--scale-bits", o.scale_bits, "Scale code bits")->check(CLI::Range(1, 16));
  sweep_cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  try {
    if (synth->parsed()) return cmd_synth(o);
    if (train->parsed()) return cmd_train(o);
    if (encode_cmd->parsed()) return cmd_encode(o);
    if (decode_cmd->parsed()) return cmd_decode(o);
    if (sweep_cmd->parsed()) return cmd_sweep(o);
  } catch (const std::exception& e) {
    std::cerr << "hatc: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
