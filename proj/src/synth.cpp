#include "hatc/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "hatc/error.hpp"

namespace hatc {
namespace {

// Engine output mapped by hand; library distributions differ across vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1)); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

constexpr int kMinShapes = 80;
constexpr int kMaxShapes = 120;
constexpr double kMinShapeSize = 0.03;
constexpr double kMaxShapeSize = 0.15;
constexpr double kMinPeriod = 2.5;
constexpr double kMaxPeriod = 7;
constexpr int kPaletteSize = 12;
constexpr double kMaxRotationDeg = 30;
constexpr double kMaxLogZoom = 0.45;
constexpr double kMaxTilt = 0.5;

using Canvas = Plane<double>;

// Surface shading of one scene element: a base level plus one of several
// periodic or noise textures, all functions of canvas coordinates.
class Paint {
 public:
  Paint(Rng& rng, double level) : level_(level), kind_(rng.integer(0, 4)) {
    const double angle = rng.uniform(0, std::numbers::pi);
    period_ = rng.uniform(kMinPeriod, kMaxPeriod);
    ux_ = std::cos(angle);
    uy_ = std::sin(angle);
    amplitude_ = rng.uniform(15, 60);
    for (auto& v : lattice_) v = rng.uniform(-1, 1);
  }

  double operator()(double x, double y) const {
    switch (kind_) {
      case 0: return level_;
      case 1: return level_ + amplitude_ * std::sin(2 * std::numbers::pi * (ux_ * x + uy_ * y) / period_);
      case 2: {
        const auto cx = static_cast<long>(std::floor((ux_ * x + uy_ * y) / period_));
        const auto cy = static_cast<long>(std::floor((-uy_ * x + ux_ * y) / period_));
        return level_ + (((cx + cy) & 1) ? amplitude_ : -amplitude_) / 2;
      }
      case 3: {
        // Brick courses: rows of height `period_`, joints offset by half a brick.
        const double row = std::floor(y / period_);
        const double bx = x / (2.5 * period_) + 0.5 * std::fmod(row, 2.0);
        const bool joint = y - row * period_ < 1.5 || (bx - std::floor(bx)) * 2.5 * period_ < 1.5;
        return joint ? level_ - amplitude_ : level_ + lattice_[static_cast<std::size_t>(row + 64) % kLattice] * 10;
      }
      default: return level_ + amplitude_ * value_noise(x / period_, y / period_);
    }
  }

 private:
  static constexpr std::size_t kLattice = 64;

  double value_noise(double x, double y) const {
    const double fx = std::floor(x), fy = std::floor(y);
    auto at = [&](double gx, double gy) {
      const auto h = static_cast<std::size_t>((static_cast<long>(gx) * 73856093L) ^ (static_cast<long>(gy) * 19349663L));
      return lattice_[h % kLattice];
    };
    const double tx = x - fx, ty = y - fy;
    const double top = at(fx, fy) * (1 - tx) + at(fx + 1, fy) * tx;
    const double bottom = at(fx, fy + 1) * (1 - tx) + at(fx + 1, fy + 1) * tx;
    return top * (1 - ty) + bottom * ty;
  }

  double level_;
  int kind_;
  double period_ = 1, ux_ = 1, uy_ = 0, amplitude_ = 0;
  std::array<double, kLattice> lattice_{};
};

// Surface vocabulary shared by every scene drawn from one palette seed, so
// distinct objects reuse the same materials and differ in layout.
class Palette {
 public:
  explicit Palette(std::uint64_t seed) {
    Rng rng(seed);
    for (int i = 0; i < kPaletteSize; ++i) paints_.emplace_back(rng, rng.uniform(0, 255));
  }
  const Paint& pick(Rng& rng) const { return paints_[static_cast<std::size_t>(rng.integer(0, kPaletteSize - 1))]; }

 private:
  std::vector<Paint> paints_;
};

template <typename Inside>
void fill(Canvas& c, double x0, double y0, double x1, double y1, const Paint& paint, Inside inside) {
  const int ix0 = std::max(0, static_cast<int>(std::ceil(x0))), iy0 = std::max(0, static_cast<int>(std::ceil(y0)));
  const int ix1 = std::min(static_cast<int>(c.cols()) - 1, static_cast<int>(std::floor(x1)));
  const int iy1 = std::min(static_cast<int>(c.rows()) - 1, static_cast<int>(std::floor(y1)));
  for (int y = iy0; y <= iy1; ++y)
    for (int x = ix0; x <= ix1; ++x)
      if (inside(static_cast<double>(x), static_cast<double>(y))) c(y, x) = paint(x, y);
}

void fill_rect(Canvas& c, double x0, double y0, double x1, double y1, const Paint& paint) {
  fill(c, x0, y0, x1, y1, paint, [&](double x, double y) { return x < x1 && y < y1; });
}

void fill_ellipse(Canvas& c, double cx, double cy, double rx, double ry, const Paint& paint) {
  fill(c, cx - rx, cy - ry, cx + rx, cy + ry, paint, [&](double x, double y) {
    const double dx = (x - cx) / rx, dy = (y - cy) / ry;
    return dx * dx + dy * dy <= 1.0;
  });
}

void fill_triangle(Canvas& c, const double (&px)[3], const double (&py)[3], const Paint& paint) {
  auto edge = [&](int a, int b, double x, double y) { return (px[b] - px[a]) * (y - py[a]) - (py[b] - py[a]) * (x - px[a]); };
  fill(c, std::min({px[0], px[1], px[2]}), std::min({py[0], py[1], py[2]}), std::max({px[0], px[1], px[2]}),
       std::max({py[0], py[1], py[2]}), paint, [&](double x, double y) {
         const double e0 = edge(0, 1, x, y), e1 = edge(1, 2, x, y), e2 = edge(2, 0, x, y);
         return (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
       });
}

void draw_facade(Canvas& c, Rng& rng, const Palette& palette, double x0, double y0, double w, double h) {
  const double wall = rng.uniform(70, 200);
  fill_rect(c, x0, y0, x0 + w, y0 + h, palette.pick(rng));
  const int rows = rng.integer(2, 6), cols = rng.integer(2, 7);
  const double cw = w / cols, ch = h / rows;
  const double fill = rng.uniform(0.35, 0.65);
  const double glass = wall > 128 ? rng.uniform(10, 70) : rng.uniform(180, 250);
  for (int r = 0; r < rows; ++r)
    for (int k = 0; k < cols; ++k) {
      const double wx = x0 + k * cw + cw * (1 - fill) / 2, wy = y0 + r * ch + ch * (1 - fill) / 2;
      fill_rect(c, wx, wy, wx + cw * fill, wy + ch * fill, Paint(rng, glass + rng.uniform(-15, 15)));
    }
}

Image quantize(const Canvas& c) {
  Image out(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.size(); ++i) out(i) = static_cast<std::uint8_t>(std::clamp(std::lround(c(i)), 0L, 255L));
  return out;
}

double bilinear(const Image& img, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(img.cols() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.rows() - 1));
  const auto x0 = static_cast<Eigen::Index>(x), y0 = static_cast<Eigen::Index>(y);
  const Eigen::Index x1 = std::min(x0 + 1, img.cols() - 1), y1 = std::min(y0 + 1, img.rows() - 1);
  const double fx = x - static_cast<double>(x0), fy = y - static_cast<double>(y0);
  const double top = img(y0, x0) * (1 - fx) + img(y0, x1) * fx;
  const double bottom = img(y1, x0) * (1 - fx) + img(y1, x1) * fx;
  return top * (1 - fy) + bottom * fy;
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << text;
    if (!out) throw Error(Errc::io, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void write_pgm_atomic(const std::filesystem::path& path, const Image& image) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  write_pgm(tmp, image);
  std::filesystem::rename(tmp, path);
}

}  // namespace

Image render_scene(std::uint64_t seed, std::uint64_t palette_seed, int width, int height) {
  if (width < kMinSynthSide || height < kMinSynthSide) throw Error(Errc::invalid_argument, "scene too small");
  Rng rng(seed);
  const Palette palette(palette_seed);
  const int cw = width * 3 / 2, ch = height * 3 / 2;
  Canvas c(ch, cw);
  const double base = rng.uniform(60, 190), gx = rng.uniform(-0.3, 0.3), gy = rng.uniform(-0.3, 0.3);
  const Paint ground(rng, 0.0);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x) c(y, x) = base + gx * (x - cw / 2.0) + gy * (y - ch / 2.0) + 0.5 * ground(x, y);

  const int shapes = rng.integer(kMinShapes, kMaxShapes);
  const double unit = std::min(cw, ch);
  for (int s = 0; s < shapes; ++s) {
    const double x = rng.uniform(-0.05, 0.95) * cw, y = rng.uniform(-0.05, 0.95) * ch;
    const double w = rng.uniform(kMinShapeSize, kMaxShapeSize) * unit, h = rng.uniform(kMinShapeSize, kMaxShapeSize) * unit;
    const Paint& paint = palette.pick(rng);
    switch (rng.integer(0, 3)) {
      case 0: fill_rect(c, x, y, x + w, y + h, paint); break;
      case 1: draw_facade(c, rng, palette, x, y, w * 1.4, h * 1.4); break;
      case 2: fill_ellipse(c, x, y, w / 2, h / 2, paint); break;
      default: {
        const double px[3] = {x, x + w, x + rng.uniform(0, w)};
        const double py[3] = {y + h, y + h, y};
        fill_triangle(c, px, py, paint);
      }
    }
  }
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) += rng.uniform(-4, 4);
  return quantize(c);
}

Image render_view(const Image& scene, std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  const double theta = rng.uniform(-kMaxRotationDeg, kMaxRotationDeg) * std::numbers::pi / 180;
  const double zoom = std::exp(rng.uniform(-kMaxLogZoom, kMaxLogZoom));
  const double tx = rng.uniform(-0.08, 0.08) * width, ty = rng.uniform(-0.08, 0.08) * height;
  // Projective tilt: up to kMaxTilt relative foreshortening across the frame.
  const double px = rng.uniform(-kMaxTilt, kMaxTilt) / width, py = rng.uniform(-kMaxTilt, kMaxTilt) / height;
  const double gain = rng.uniform(0.85, 1.15), offset = rng.uniform(-15, 15);
  const double cs = std::cos(theta) / zoom, sn = std::sin(theta) / zoom;
  const double cx = (scene.cols() - 1) / 2.0 + tx, cy = (scene.rows() - 1) / 2.0 + ty;
  const double cu = (width - 1) / 2.0, cv = (height - 1) / 2.0;
  Canvas c(height, width);
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u) {
      const double w = 1.0 + px * (u - cu) + py * (v - cv);
      const double du = (u - cu) / w, dv = (v - cv) / w;
      const double value = bilinear(scene, cx + cs * du - sn * dv, cy + sn * du + cs * dv);
      c(v, u) = gain * value + offset + rng.uniform(-3, 3);
    }
  return quantize(c);
}

std::filesystem::path synthesize_corpus(const std::filesystem::path& dir, const SynthOptions& options) {
  if (options.objects < 1 || options.db_views < 1 || options.query_views < 1 || options.train_images < 0)
    throw Error(Errc::invalid_argument, "corpus counts must be positive");
  for (const char* sub : {"db", "query", "train"}) std::filesystem::create_directories(dir / sub);

  enum : std::uint64_t { kObjectStream = 1, kViewStream = 2, kTrainStream = 3, kPaletteStream = 4 };
  const auto object_palette = mix(options.seed, kPaletteStream, 0), train_palette = mix(options.seed, kPaletteStream, 1);
  std::ostringstream manifest;
  manifest << "# role path object\n";
  char name[64];
  for (int o = 0; o < options.objects; ++o) {
    const Image scene = render_scene(mix(options.seed, kObjectStream, static_cast<std::uint64_t>(o)), object_palette, options.width,
                                     options.height);
    const int views = options.db_views + options.query_views;
    for (int v = 0; v < views; ++v) {
      const bool query = v >= options.db_views;
      const auto view_seed = mix(options.seed, kViewStream, static_cast<std::uint64_t>(o * views + v));
      std::snprintf(name, sizeof name, "%s/obj%03d_v%d.pgm", query ? "query" : "db", o, v);
      write_pgm_atomic(dir / name, render_view(scene, view_seed, options.width, options.height));
      std::snprintf(name + std::strlen(name), 16, " obj%03d", o);
      manifest << (query ? "query " : "db ") << name << '\n';
    }
  }
  for (int t = 0; t < options.train_images; ++t) {
    const auto seed = mix(options.seed, kTrainStream, static_cast<std::uint64_t>(t));
    const Image scene = render_scene(seed, train_palette, options.width, options.height);
    std::snprintf(name, sizeof name, "train/train%03d.pgm", t);
    write_pgm_atomic(dir / name, render_view(scene, ~seed, options.width, options.height));
  }
  const auto path = dir / "manifest.txt";
  write_atomic(path, manifest.str());
  return path;
}

}  // namespace hatc
