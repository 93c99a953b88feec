#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hatc/retrieval.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace hatc {
namespace {

namespace fs = std::filesystem;

RankedList ranked_of(std::vector<std::string> entries) { return {"q", std::move(entries)}; }

TEST(MatchScore, IdenticalSetsMatchEverything) {
  const auto vs = test::random_vectors(1, 60, 512);
  const auto p = pack(vs);
  const auto s = match_score(p, p);
  EXPECT_EQ(s.matches, 60);
  EXPECT_EQ(s.distance_sum, 0);
}

TEST(MatchScore, UnrelatedSetsRarelyMatch) {
  const auto a = pack(test::random_vectors(2, 100, 512));
  const auto b = pack(test::random_vectors(3, 100, 512));
  EXPECT_LE(match_score(a, b).matches, 2);
}

TEST(MatchScore, SingleCandidateUsesDistanceCap) {
  std::mt19937_64 rng(4);
  const BitString base = test::random_bits(rng, 512);
  for (int flips : {0, 63, 64, 65, 200}) {
    BitString other = base;
    for (int j = 0; j < flips; ++j) other.set(j, !other.test(j));
    const std::vector<BitString> q{base}, c{other};
    EXPECT_EQ(match_score(pack(q), pack(c)).matches, flips <= kSingleCandidateCap ? 1 : 0) << flips;
  }
}

TEST(MatchScore, RatioBoundary) {
  std::mt19937_64 rng(5);
  const BitString q = test::random_bits(rng, 512);
  for (auto [near, second, accept] : {std::tuple{40, 50, true}, std::tuple{41, 50, false}, std::tuple{0, 0, true}}) {
    BitString a = q, b = q;
    for (int j = 0; j < near; ++j) a.set(j, !a.test(j));
    for (int j = 0; j < second; ++j) b.set(511 - j, !b.test(511 - j));
    const std::vector<BitString> qs{q}, cs{a, b};
    EXPECT_EQ(match_score(pack(qs), pack(cs)).matches, accept ? 1 : 0) << near << "/" << second;
  }
}

TEST(MatchScore, Errors) {
  const auto a = pack(test::random_vectors(6, 3, 512));
  EXPECT_ERRC(match_score(pack({}), a), Errc::empty_query);
  EXPECT_EQ(match_score(a, pack({})).matches, 0);
  EXPECT_ERRC(match_score(a, pack(test::random_vectors(7, 3, 256))), Errc::dimension_mismatch);
}

TEST(AveragePrecision, HandCases) {
  EXPECT_NEAR(average_precision(ranked_of({"a", "x", "b"}), {"a", "b"}), (1.0 + 2.0 / 3.0) / 2, 1e-12);
  EXPECT_DOUBLE_EQ(average_precision(ranked_of({"a", "b", "x"}), {"a", "b"}), 1.0);
  EXPECT_DOUBLE_EQ(average_precision(ranked_of({"x", "y"}), {"a"}), 0.0);
  EXPECT_NEAR(average_precision(ranked_of({"x", "a", "y", "b"}), {"a", "b"}), 0.5, 1e-12);
  EXPECT_ERRC(average_precision(ranked_of({"a"}), {}), Errc::no_relevant_documents);
}

TEST(AveragePrecision, MatchesRationalOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<std::string> list;
    std::set<std::string> relevant;
    for (std::size_t i = 0; i < n; ++i) {
      list.push_back("e" + std::to_string(i));
      if (rng() % 3 == 0) relevant.insert(list.back());
    }
    if (rng() % 4 == 0) relevant.insert("missing");  // relevant but never ranked
    if (relevant.empty()) relevant.insert(list.front());
    std::shuffle(list.begin(), list.end(), rng);
    EXPECT_NEAR(average_precision(ranked_of(list), relevant), oracle::average_precision(list, relevant).value(), 1e-12);
  }
}

TEST(MeanAveragePrecision, Basics) {
  const std::vector<double> two{1.0, 0.5};
  EXPECT_DOUBLE_EQ(mean_average_precision(two), 0.75);
  std::mt19937_64 rng(9);
  std::vector<double> aps(100);
  double sum = 0;
  for (auto& a : aps) sum += a = std::uniform_real_distribution<double>()(rng);
  EXPECT_NEAR(mean_average_precision(aps), sum / 100, 1e-12);
  EXPECT_ERRC(mean_average_precision({}), Errc::empty_input);
}

std::vector<DatabaseEntry> database_of(std::uint64_t seed, int n) {
  std::vector<DatabaseEntry> db;
  for (int i = 0; i < n; ++i)
    db.push_back({"d" + std::to_string(i), "o" + std::to_string(i % 3), pack(test::random_vectors(seed + i, 30, 512))});
  return db;
}

TEST(Rank, SelfFirstAndOrderInvariant) {
  auto db = database_of(20, 12);
  const auto query = db[7].descriptors;
  const auto a = rank("q", query, db);
  ASSERT_EQ(a.length(), 12u);
  EXPECT_EQ(a.entries.front(), "d7");
  std::reverse(db.begin(), db.end());
  EXPECT_EQ(rank("q", query, db).entries, a.entries);
  std::mt19937_64 rng(3);
  std::shuffle(db.begin(), db.end(), rng);
  EXPECT_EQ(rank("q", query, db).entries, a.entries);
}

TEST(Rank, EmptyQueryKeepsIdOrder) {
  const auto db = database_of(40, 5);
  const auto r = rank("q", pack({}), db);
  EXPECT_EQ(r.entries, (std::vector<std::string>{"d0", "d1", "d2", "d3", "d4"}));
}

TEST(RanksAbove, CountThenDistance) {
  EXPECT_TRUE(ranks_above({5, 100}, {4, 0}));
  EXPECT_TRUE(ranks_above({5, 10}, {5, 11}));
  EXPECT_FALSE(ranks_above({5, 10}, {5, 10}));
}

class ManifestTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("hatc_manifest_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path write(const std::string& text) {
    std::ofstream(dir_ / "m.txt") << text;
    return dir_ / "m.txt";
  }
  fs::path dir_;
};

TEST_F(ManifestTest, ParsesRolesCommentsAndPaths) {
  const auto c = load_manifest(write("# header\n\ndb a.pgm o1  # trailing\ndb /abs/b.pgm o2\nquery q.pgm o1\n"));
  ASSERT_EQ(c.database.size(), 2u);
  ASSERT_EQ(c.queries.size(), 1u);
  EXPECT_EQ(c.database[0].path, dir_ / "a.pgm");
  EXPECT_EQ(c.database[1].path, fs::path("/abs/b.pgm"));
  EXPECT_EQ(c.queries[0].object, "o1");
}

TEST_F(ManifestTest, Errors) {
  EXPECT_ERRC(load_manifest(write("train a.pgm o\n")), Errc::io);
  EXPECT_ERRC(load_manifest(write("db a.pgm\n")), Errc::io);
  EXPECT_ERRC(load_manifest(write("db a.pgm o\n")), Errc::io);
  EXPECT_ERRC(load_manifest(dir_ / "absent.txt"), Errc::io);
}

TEST(Sweep, SingleCellAndCsv) {
  const auto dir = fs::temp_directory_path() / "hatc_sweep_unit";
  fs::remove_all(dir);
  SynthOptions o;
  o.objects = 3;
  o.db_views = 2;
  o.train_images = 0;
  o.width = 128;
  o.height = 96;
  const Corpus corpus = load_manifest(synthesize_corpus(dir, o));
  SweepGrid grid;
  grid.cta_q = {50};
  grid.atc_thresholds.clear();
  grid.hatc_q.clear();
  grid.hatc_z.clear();
  const auto points = sweep(corpus, grid, ModelBank{});
  ASSERT_EQ(points.size(), 1u);
  EXPECT_EQ(points[0].method, Method::cta);
  EXPECT_GT(points[0].bytes_total, points[0].bytes_image);
  EXPECT_GT(points[0].map, 0.5);
  ASSERT_TRUE(points[0].psnr_db.has_value());

  std::ostringstream csv;
  write_csv(csv, points);
  std::istringstream lines(csv.str());
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, "method,q,threshold,refine_z,bytes_image,bytes_loc,bytes_enh,bytes_total,psnr_db,map");
  EXPECT_EQ(row.rfind("CTA,50,30,,", 0), 0u) << row;
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 9);

  write_svgs(dir / "plots", points);
  for (const char* f : {"rate-map.svg", "rate-psnr.svg", "map-psnr-iso-rate.svg"})
    EXPECT_TRUE(fs::exists(dir / "plots" / f)) << f;
  fs::remove_all(dir);
}

}  // namespace
}  // namespace hatc
