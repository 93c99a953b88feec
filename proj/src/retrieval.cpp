#include "hatc/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "hatc/image_codec.hpp"
#include "parallel.hpp"

namespace hatc {

using detail::parallel_for;

PackedDescriptors pack(std::span<const BitString> descriptors) {
  const Eigen::Index words = descriptors.empty() ? 0 : static_cast<Eigen::Index>(descriptors.front().words().size());
  PackedDescriptors out(static_cast<Eigen::Index>(descriptors.size()), words);
  for (std::size_t r = 0; r < descriptors.size(); ++r) {
    const auto w = descriptors[r].words();
    if (static_cast<Eigen::Index>(w.size()) != words) throw Error(Errc::dimension_mismatch, "mixed descriptor lengths");
    for (Eigen::Index c = 0; c < words; ++c) out(static_cast<Eigen::Index>(r), c) = w[static_cast<std::size_t>(c)];
  }
  return out;
}

bool ranks_above(const MatchScore& a, const MatchScore& b) {
  if (a.matches != b.matches) return a.matches > b.matches;
  return a.distance_sum < b.distance_sum;
}

MatchScore match_score(const PackedDescriptors& query, const PackedDescriptors& candidate) {
  if (query.rows() == 0) throw Error(Errc::empty_query, "query has no descriptors");
  MatchScore score;
  if (candidate.rows() == 0) return score;
  if (query.cols() != candidate.cols()) throw Error(Errc::dimension_mismatch, "descriptor lengths differ");
  const Eigen::Index words = query.cols();
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    int nearest = std::numeric_limits<int>::max(), second = std::numeric_limits<int>::max();
    for (Eigen::Index j = 0; j < candidate.rows(); ++j) {
      int d = 0;
      for (Eigen::Index w = 0; w < words; ++w) d += std::popcount(query(i, w) ^ candidate(j, w));
      if (d < nearest) {
        second = nearest;
        nearest = d;
      } else if (d < second) {
        second = d;
      }
    }
    const bool accepted = candidate.rows() == 1 ? nearest <= kSingleCandidateCap
                                                : kRatioDenominator * nearest <= kRatioNumerator * second;
    if (accepted) {
      ++score.matches;
      score.distance_sum += nearest;
    }
  }
  return score;
}

MatchScore match_score(const FeatureSet& query, const FeatureSet& candidate) {
  if (query.descriptors.empty()) throw Error(Errc::empty_query, "query has no descriptors");
  return match_score(pack(query.descriptors), pack(candidate.descriptors));
}

RankedList rank(const std::string& query_id, const PackedDescriptors& query, std::span<const DatabaseEntry> database) {
  std::vector<MatchScore> scores(database.size());
  if (query.rows() > 0)
    for (std::size_t i = 0; i < database.size(); ++i) scores[i] = match_score(query, database[i].descriptors);
  std::vector<std::size_t> order(database.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ranks_above(scores[a], scores[b])) return true;
    if (ranks_above(scores[b], scores[a])) return false;
    return database[a].id < database[b].id;
  });
  RankedList ranked{query_id, {}};
  for (std::size_t i : order) ranked.entries.push_back(database[i].id);
  return ranked;
}

double average_precision(const RankedList& ranked, const std::set<std::string>& relevant) {
  if (relevant.empty()) throw Error(Errc::no_relevant_documents, "query has no relevant documents");
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < ranked.entries.size(); ++k) {
    if (!relevant.contains(ranked.entries[k])) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return sum / static_cast<double>(relevant.size());
}

double mean_average_precision(std::span<const double> aps) {
  if (aps.empty()) throw Error(Errc::empty_input, "no queries");
  return std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
}

Corpus load_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(Errc::io, "cannot open manifest " + manifest.string());
  const auto base = manifest.parent_path();
  Corpus corpus;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string role, path, object;
    if (!(fields >> role)) continue;
    if (!(fields >> path >> object))
      throw Error(Errc::io, manifest.string() + ":" + std::to_string(lineno) + ": expected <role> <path> <object>");
    CorpusRecord rec{std::filesystem::path(path).is_absolute() ? std::filesystem::path(path) : base / path, object};
    if (role == "db")
      corpus.database.push_back(std::move(rec));
    else if (role == "query")
      corpus.queries.push_back(std::move(rec));
    else
      throw Error(Errc::io, manifest.string() + ":" + std::to_string(lineno) + ": unknown role '" + role + "'");
  }
  if (corpus.database.empty() || corpus.queries.empty())
    throw Error(Errc::io, "manifest needs at least one db and one query record");
  return corpus;
}

namespace {

struct Cell {
  Method method;
  int q = 0;
  int threshold = 0;
  int z = 0;
};

struct QueryOutcome {
  LayerSizes sizes;
  std::size_t total = 0;
  double psnr = 0;
  double ap = 0;
};

}  // namespace

std::vector<RateAccuracyPoint> sweep(const Corpus& corpus, const SweepGrid& grid, const ModelBank& models,
                                     const SweepOptions& options) {
  std::vector<Image> db_images(corpus.database.size()), query_images(corpus.queries.size());
  parallel_for(db_images.size(), options.jobs, [&](std::size_t i) { db_images[i] = read_pgm(corpus.database[i].path); });
  parallel_for(query_images.size(), options.jobs, [&](std::size_t i) { query_images[i] = read_pgm(corpus.queries[i].path); });

  std::vector<DatabaseEntry> database(corpus.database.size());
  parallel_for(database.size(), options.jobs, [&](std::size_t i) {
    const auto fs = extract(db_images[i], grid.detector_threshold);
    database[i] = {corpus.database[i].path.filename().string() + "#" + std::to_string(i), corpus.database[i].object,
                   pack(fs.descriptors)};
  });
  std::vector<std::set<std::string>> relevant(corpus.queries.size());
  for (std::size_t qi = 0; qi < corpus.queries.size(); ++qi) {
    for (const auto& entry : database)
      if (entry.object == corpus.queries[qi].object) relevant[qi].insert(entry.id);
    if (relevant[qi].empty())
      throw Error(Errc::no_relevant_documents, "query " + corpus.queries[qi].path.string() + " has no relevant images");
  }

  std::vector<Cell> cells;
  for (int q : grid.cta_q) cells.push_back({Method::cta, q, grid.detector_threshold, 0});
  for (int t : grid.atc_thresholds) cells.push_back({Method::atc, 0, t, 0});
  for (int q : grid.hatc_q)
    for (int z : grid.hatc_z) cells.push_back({Method::hatc, q, grid.detector_threshold, z});

  std::vector<RateAccuracyPoint> points;
  for (const Cell& cell : cells) {
    std::vector<QueryOutcome> outcomes(query_images.size());
    parallel_for(query_images.size(), options.jobs, [&](std::size_t qi) {
      const Image& image = query_images[qi];
      Encoded enc;
      DecodedResult dec;
      switch (cell.method) {
        case Method::cta:
          enc = encode_cta(image, cell.q);
          dec = decode_cta(enc.bytes, cell.threshold);
          break;
        case Method::atc:
          enc = encode_atc(image, cell.threshold, models.intra(), grid.scale_bits);
          dec = decode_atc(enc.bytes, models.intra());
          break;
        case Method::hatc: {
          EncodeConfig config{Method::hatc, cell.q, cell.threshold, cell.z, grid.scale_bits};
          const auto& model = models.residual_for(cell.q);
          enc = encode_hatc(image, config, model);
          dec = decode_hatc(enc.bytes, model);
          break;
        }
      }
      QueryOutcome& out = outcomes[qi];
      out.sizes = dec.rate;
      out.total = enc.bytes.size();
      if (dec.image) out.psnr = psnr(image, *dec.image);
      const auto ranked = rank(corpus.queries[qi].path.filename().string(), pack(dec.features.descriptors), database);
      out.ap = average_precision(ranked, relevant[qi]);
    });

    RateAccuracyPoint p;
    p.method = cell.method;
    if (cell.method != Method::atc) p.q = cell.q;
    p.threshold = cell.threshold;
    if (cell.method == Method::hatc) p.refine_z = cell.z;
    std::vector<double> aps;
    double psnr_sum = 0;
    for (const auto& o : outcomes) {
      p.bytes_image += static_cast<double>(o.sizes.image);
      p.bytes_loc += static_cast<double>(o.sizes.location);
      p.bytes_enh += static_cast<double>(o.sizes.enhancement);
      p.bytes_total += static_cast<double>(o.total);
      psnr_sum += o.psnr;
      aps.push_back(o.ap);
    }
    const double n = static_cast<double>(outcomes.size());
    p.bytes_image /= n;
    p.bytes_loc /= n;
    p.bytes_enh /= n;
    p.bytes_total /= n;
    if (cell.method != Method::atc) p.psnr_db = psnr_sum / n;
    p.map = mean_average_precision(aps);
    if (options.log) {
      *options.log << to_string(p.method) << " q=" << (p.q ? std::to_string(*p.q) : "-") << " t=" << p.threshold
                   << " z=" << (p.refine_z ? std::to_string(*p.refine_z) : "-") << " bytes=" << p.bytes_total
                   << " map=" << p.map << '\n';
    }
    points.push_back(p);
  }
  return points;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, std::span<const RateAccuracyPoint> points) {
  out << "method,q,threshold,refine_z,bytes_image,bytes_loc,bytes_enh,bytes_total,psnr_db,map\n";
  for (const auto& p : points) {
    out << to_string(p.method) << ',' << (p.q ? std::to_string(*p.q) : "") << ',' << p.threshold << ','
        << (p.refine_z ? std::to_string(*p.refine_z) : "") << ',' << fixed(p.bytes_image, 2) << ','
        << fixed(p.bytes_loc, 2) << ',' << fixed(p.bytes_enh, 2) << ',' << fixed(p.bytes_total, 2) << ','
        << (p.psnr_db ? fixed(*p.psnr_db, 3) : "") << ',' << fixed(p.map, 6) << '\n';
  }
}

namespace {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> xy;
};

void write_chart(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel, std::vector<Series> series) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 160, kTop = 40, kBottom = 60;
  double x0 = std::numeric_limits<double>::max(), x1 = std::numeric_limits<double>::lowest();
  double y0 = x0, y1 = x1;
  for (const auto& s : series)
    for (auto [x, y] : s.xy) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-9) x1 = x0 + 1;
  if (y1 - y0 < 1e-9) y1 = y0 + 1;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto sy = [&](double y) { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\"" << kH - kBottom
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4, fy = y0 + (y1 - y0) * i / 4;
    svg << "<text x=\"" << sx(fx) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << fixed(fx, 1) << "</text>\n"
        << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(fy) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
        << fixed(fy, 2) << "</text>\n";
  }
  svg << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 18 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << xlabel << "</text>\n"
      << "<text x=\"18\" y=\"" << (kTop + kH - kBottom) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << (kTop + kH - kBottom) / 2 << ")\">" << ylabel << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    auto& s = series[i];
    std::sort(s.xy.begin(), s.xy.end());
    const char* colour = palette[i % 10];
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (auto [x, y] : s.xy) svg << fixed(sx(x), 1) << ',' << fixed(sy(y), 1) << ' ';
    svg << "\"/>\n";
    for (auto [x, y] : s.xy)
      svg << "<circle cx=\"" << fixed(sx(x), 1) << "\" cy=\"" << fixed(sy(y), 1) << "\" r=\"3\" fill=\"" << colour
          << "\"/>\n";
    const double ly = kTop + 16.0 * static_cast<double>(i);
    svg << "<line x1=\"" << kW - kRight + 12 << "\" y1=\"" << ly << "\" x2=\"" << kW - kRight + 32 << "\" y2=\"" << ly
        << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kW - kRight + 38 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << s.name << "</text>\n";
  }
  svg << "</svg>\n";
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << svg.str();
    if (!out) throw Error(Errc::io, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_svgs(const std::filesystem::path& dir, std::span<const RateAccuracyPoint> points) {
  std::filesystem::create_directories(dir);
  std::map<std::string, Series> rate_map, rate_psnr;
  for (const auto& p : points) {
    std::string name = to_string(p.method);
    if (p.method == Method::hatc) name += " Q=" + std::to_string(*p.q);
    auto& s = rate_map[name];
    s.name = name;
    s.xy.emplace_back(p.bytes_total / 1024.0, p.map);
    if (p.psnr_db && p.method == Method::cta) {
      auto& r = rate_psnr[name];
      r.name = name;
      r.xy.emplace_back(p.bytes_total / 1024.0, *p.psnr_db);
    }
  }
  auto values = [](std::map<std::string, Series>& m) {
    std::vector<Series> v;
    for (auto& [k, s] : m) v.push_back(std::move(s));
    return v;
  };
  write_chart(dir / "rate-map.svg", "Rate-accuracy", "KB/query", "MAP", values(rate_map));
  write_chart(dir / "rate-psnr.svg", "Image layer rate-distortion", "KB/query", "PSNR [dB]", values(rate_psnr));

  // HATC points bucketed by total rate on a quarter-octave grid.
  std::map<int, Series> iso;
  for (const auto& p : points) {
    if (p.method != Method::hatc || !p.psnr_db || p.bytes_total <= 0) continue;
    const int bucket = static_cast<int>(std::lround(4.0 * std::log2(p.bytes_total)));
    auto& s = iso[bucket];
    s.name = "~" + fixed(std::exp2(bucket / 4.0) / 1024.0, 2) + " KB";
    s.xy.emplace_back(*p.psnr_db, p.map);
  }
  std::vector<Series> iso_series;
  for (auto& [b, s] : iso) iso_series.push_back(std::move(s));
  write_chart(dir / "map-psnr-iso-rate.svg", "MAP vs PSNR at fixed rate", "PSNR [dB]", "MAP", std::move(iso_series));
}

}  // namespace hatc
