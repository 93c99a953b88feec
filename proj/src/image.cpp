#include "hatc/image.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "hatc/error.hpp"

namespace hatc {

namespace {

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

int read_header_int(std::istream& in, const std::filesystem::path& path) {
  skip_space_and_comments(in);
  int v = -1;
  if (!(in >> v) || v < 0) throw Error(Errc::io, "bad PGM header in " + path.string());
  return v;
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  char p = 0, five = 0;
  in.get(p).get(five);
  if (p != 'P' || five != '5') throw Error(Errc::io, path.string() + " is not a binary PGM");
  int w = read_header_int(in, path);
  int h = read_header_int(in, path);
  int maxval = read_header_int(in, path);
  if (maxval != 255 || w == 0 || h == 0) throw Error(Errc::io, "unsupported PGM " + path.string());
  in.get();  // single whitespace before raster
  Image image(h, w);
  in.read(reinterpret_cast<char*>(image.data()), static_cast<std::streamsize>(image.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.size()))
    throw Error(Errc::io, "truncated PGM raster in " + path.string());
  return image;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

Image halve(const Image& image) {
  const Eigen::Index h = image.rows() / 2, w = image.cols() / 2;
  Image out(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      int s = image(2 * y, 2 * x) + image(2 * y, 2 * x + 1) + image(2 * y + 1, 2 * x) + image(2 * y + 1, 2 * x + 1);
      out(y, x) = static_cast<std::uint8_t>((s + 2) >> 2);
    }
  return out;
}

Image two_thirds(const Image& image) {
  const int h = static_cast<int>(image.rows()), w = static_cast<int>(image.cols());
  // Separable [1 2 1] / 4 with clamped borders, kept at 4x precision.
  Plane<std::int32_t> horiz(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int l = image(y, x > 0 ? x - 1 : 0), r = image(y, x + 1 < w ? x + 1 : w - 1);
      horiz(y, x) = l + 2 * image(y, x) + r;
    }
  Plane<std::int32_t> smooth(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int u = horiz(y > 0 ? y - 1 : 0, x), d = horiz(y + 1 < h ? y + 1 : h - 1, x);
      smooth(y, x) = u + 2 * horiz(y, x) + d;  // 16x
    }

  const int oh = h * 2 / 3, ow = w * 2 / 3;
  Image out(oh, ow);
  // Output sample i sits at source coordinate (i + 0.5) * 1.5 - 0.5, in Q8.
  auto source = [](int i, int limit, int& i0, int& frac) {
    int pos = ((2 * i + 1) * 3 * 256) / 4 - 128;
    i0 = pos >> 8;
    frac = pos & 255;
    if (i0 >= limit - 1) {
      i0 = limit - 2;
      frac = 256;
    }
  };
  for (int y = 0; y < oh; ++y) {
    int y0, fy;
    source(y, h, y0, fy);
    for (int x = 0; x < ow; ++x) {
      int x0, fx;
      source(x, w, x0, fx);
      std::int64_t top = std::int64_t{smooth(y0, x0)} * (256 - fx) + std::int64_t{smooth(y0, x0 + 1)} * fx;
      std::int64_t bot = std::int64_t{smooth(y0 + 1, x0)} * (256 - fx) + std::int64_t{smooth(y0 + 1, x0 + 1)} * fx;
      std::int64_t v = top * (256 - fy) + bot * fy;  // 16 * 2^16 scale
      out(y, x) = static_cast<std::uint8_t>((v + (std::int64_t{1} << 19)) >> 20);
    }
  }
  return out;
}

}  // namespace hatc
