#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dyadrec/errors.hpp"
#include "dyadrec/ingest.hpp"
#include "support/oracles.hpp"

using namespace dyadrec;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("dyadrec-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

Aggregation from_text(const std::string& text, bool strict = false) {
  std::istringstream in(text);
  return read_events(in, IngestOptions{strict});
}

std::optional<double> weight_by_name(const WeightedDigraph& g, const std::string& a, const std::string& b) {
  VertexId ia = 0, ib = 0;
  bool fa = false, fb = false;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (g.external_id(v) == a) ia = v, fa = true;
    if (g.external_id(v) == b) ib = v, fb = true;
  }
  if (!fa || !fb) return std::nullopt;
  return g.weight(ia, ib);
}

}  // namespace

TEST(AggregateEvents, RepeatedCallsSum) {
  const auto agg = from_text("timestamp,caller,callee\n1,a,b\n2,a,b\n3,a,b\n");
  EXPECT_EQ(agg.graph.arc_count(), 1u);
  EXPECT_EQ(weight_by_name(agg.graph, "a", "b"), 3.0);
  EXPECT_EQ(agg.stats.events_read, 3u);
  EXPECT_TRUE(agg.stats.balanced());
}

TEST(AggregateEvents, MutualPair) {
  const auto agg = from_text("timestamp,caller,callee\n1,a,b\n2,b,a\n");
  const auto c = dyad_census(agg.graph);
  EXPECT_EQ(c.mutual, 1u);
  EXPECT_EQ(weight_by_name(agg.graph, "a", "b"), 1.0);
  EXPECT_EQ(weight_by_name(agg.graph, "b", "a"), 1.0);
}

TEST(AggregateEvents, SelfCallsAndMalformedLinesAreCounted) {
  const auto agg = from_text("timestamp,caller,callee\n# comment\n1,a,a\nnot a row\n2,a,b\n,x,\n3,b,a\n");
  EXPECT_EQ(agg.stats.self_calls_dropped, 1u);
  EXPECT_EQ(agg.stats.malformed_lines, 2u);
  EXPECT_EQ(agg.stats.aggregated_weight, 2u);
  EXPECT_EQ(agg.stats.events_read, 5u);
  EXPECT_TRUE(agg.stats.balanced());
  EXPECT_THROW(from_text("timestamp,caller,callee\nnot a row\n", true), ValidationError);
}

TEST(AggregateEvents, HeaderRequired) {
  EXPECT_THROW(from_text("a,b,c\n1,a,b\n"), ValidationError);
  const auto empty = from_text("timestamp,caller,callee\n");
  EXPECT_EQ(empty.graph.vertex_count(), 0u);
}

TEST(AggregateEvents, TimestampOptional) {
  const auto agg = from_text("timestamp,caller,callee\n,a,b\n");
  EXPECT_EQ(agg.stats.malformed_lines, 0u);
  EXPECT_EQ(weight_by_name(agg.graph, "a", "b"), 1.0);
}

TEST(AggregateEvents, MatchesSortAndCountOracle) {
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> who(0, 150);
  std::vector<std::pair<std::string, std::string>> calls;
  std::string text = "timestamp,caller,callee\n";
  for (int i = 0; i < 10000; ++i) {
    calls.emplace_back("u" + std::to_string(who(rng)), "u" + std::to_string(who(rng)));
    text += std::to_string(1700000000 + i) + "," + calls.back().first + "," + calls.back().second + "\n";
  }
  const auto agg = from_text(text);
  const auto expected = oracle::sort_and_count(calls);
  ASSERT_EQ(agg.graph.arc_count(), expected.size());
  for (const Arc& a : agg.graph.arcs()) {
    const auto key = std::make_pair(agg.graph.external_id(a.source), agg.graph.external_id(a.target));
    ASSERT_TRUE(expected.count(key));
    EXPECT_EQ(a.weight, static_cast<double>(expected.at(key)));
  }
  EXPECT_TRUE(agg.stats.balanced());
}

TEST(AggregateEvents, PermutationInvariant) {
  std::mt19937_64 rng(52);
  std::uniform_int_distribution<int> who(0, 40);
  std::vector<std::string> lines;
  for (int i = 0; i < 3000; ++i) lines.push_back(std::to_string(i) + ",n" + std::to_string(who(rng)) + ",n" + std::to_string(who(rng)));
  auto join = [](const std::vector<std::string>& ls) {
    std::string t = "timestamp,caller,callee\n";
    for (const auto& l : ls) t += l + "\n";
    return t;
  };
  const auto a = from_text(join(lines));
  std::shuffle(lines.begin(), lines.end(), rng);
  const auto b = from_text(join(lines));
  EXPECT_EQ(a.graph, b.graph);
}

TEST(ArcCounter, MergeIsAssociativeAndCommutative) {
  ArcCounter x, y, z;
  x.add("a", "b");
  x.add("b", "a", 2);
  y.add("c", "a");
  y.add("a", "b", 4);
  EXPECT_FALSE(z.add("d", "d"));
  z.add("b", "c");
  ArcCounter xy_z = x;
  xy_z.merge(y);
  xy_z.merge(z);
  ArcCounter z_yx = z;
  ArcCounter yx = y;
  yx.merge(x);
  z_yx.merge(yx);
  EXPECT_EQ(xy_z.build(), z_yx.build());
  EXPECT_EQ(xy_z.total_weight(), 9u);
}

TEST(ArcCounter, NumericIdsOrderNumerically) {
  ArcCounter c;
  c.add("10", "9");
  c.add("9", "100");
  const auto g = c.build();
  EXPECT_EQ(g.external_id(0), "9");
  EXPECT_EQ(g.external_id(1), "10");
  EXPECT_EQ(g.external_id(2), "100");
}

TEST(EventFiles, MultipleFilesAndThreads) {
  TempDir dir;
  write(dir / "a.csv", "timestamp,caller,callee\n1,x,y\n2,y,x\n");
  write(dir / "b.csv", "timestamp,caller,callee\n3,x,y\n4,y,z\n5,z,z\n");
  const std::vector<fs::path> paths{dir / "a.csv", dir / "b.csv"};
  const auto one = read_event_files(paths, {}, 1);
  const auto two = read_event_files(paths, {}, 2);
  EXPECT_EQ(one.graph, two.graph);
  EXPECT_EQ(one.stats.events_read, 5u);
  EXPECT_EQ(one.stats.self_calls_dropped, 1u);
  EXPECT_EQ(weight_by_name(one.graph, "x", "y"), 2.0);
  EXPECT_THROW(read_events_file(dir / "missing.csv"), IoError);
}

TEST(Snapshot, EdgeListWithoutSidecar) {
  TempDir dir;
  write(dir / "g.csv", "src,dst,weight\n1,2,6\n2,1,4\n");
  const auto g = load_edge_list(dir / "g.csv");
  EXPECT_EQ(dyad_census(g).mutual, 1u);
  EXPECT_EQ(weight_by_name(g, "1", "2"), 6.0);
  EXPECT_EQ(weight_by_name(g, "2", "1"), 4.0);
}

TEST(Snapshot, HeaderOnlyIsEmptyGraph) {
  TempDir dir;
  write(dir / "g.csv", "src,dst,weight\n");
  EXPECT_EQ(load_edge_list(dir / "g.csv").vertex_count(), 0u);
}

TEST(Snapshot, Errors) {
  TempDir dir;
  write(dir / "neg.csv", "src,dst,weight\n1,2,-1\n");
  EXPECT_THROW(load_edge_list(dir / "neg.csv"), ValidationError);
  write(dir / "zero.csv", "src,dst,weight\n1,2,0\n");
  EXPECT_THROW(load_edge_list(dir / "zero.csv"), ValidationError);
  write(dir / "hdr.csv", "a,b,c\n1,2,1\n");
  EXPECT_THROW(load_edge_list(dir / "hdr.csv"), ValidationError);
  write(dir / "dup.csv", "src,dst,weight\n1,2,1\n1,2,2\n");
  const auto snap = load_snapshot(dir / "dup.csv");
  EXPECT_EQ(snap.duplicate_rows, 1u);
  EXPECT_EQ(weight_by_name(snap.graph, "1", "2"), 3.0);
  EXPECT_THROW(load_snapshot(dir / "dup.csv", IngestOptions{true}), ValidationError);
  EXPECT_THROW(load_edge_list(dir / "nope.csv"), IoError);
  EXPECT_THROW(save_snapshot(snap.graph, dir / "no-such-dir" / "x.csv"), IoError);
}

TEST(Snapshot, RoundTripIsLossless) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> frac(0.001, 1000.0);
  TempDir dir;
  for (int rep = 0; rep < 10; ++rep) {
    auto arcs = oracle::random_arcs(40, 0.1, rng, 9);
    for (auto& a : arcs) a.weight = frac(rng);  // non-integer weights stress the formatter
    GraphBuilder b(40);
    for (const auto& a : arcs) b.add_arc(a);
    std::vector<std::string> ids;
    for (int i = 0; i < 40; ++i) ids.push_back("+44 " + std::to_string(7000 + i * 13));
    b.set_external_ids(ids);
    const auto g = b.finalize();
    save_snapshot(g, dir / "g.csv", {{"regime", "observed"}, {"seed", "9"}});
    EXPECT_TRUE(fs::exists(sidecar_path(dir / "g.csv")));
    const auto snap = load_snapshot(dir / "g.csv");
    EXPECT_EQ(snap.graph, g);
    ASSERT_GE(snap.provenance.size(), 3u);
    EXPECT_EQ(snap.provenance[1], (std::pair<std::string, std::string>{"regime", "observed"}));
  }
}

TEST(Snapshot, RejectsUnwritableIds) {
  TempDir dir;
  GraphBuilder b(2);
  b.add_arc(0, 1, 1);
  b.set_external_ids({"a,b", "c"});
  EXPECT_THROW(save_snapshot(b.finalize(), dir / "g.csv"), ValidationError);
}

TEST(Snapshot, IngestThenSaveThenLoad) {
  TempDir dir;
  const auto agg = from_text("timestamp,caller,callee\n1,alice,bob\n2,bob,alice\n3,alice,carol\n");
  save_snapshot(agg.graph, dir / "g.csv");
  const auto back = load_edge_list(dir / "g.csv");
  EXPECT_EQ(back, agg.graph);
  EXPECT_EQ(sidecar_path("/x/graph.csv"), fs::path("/x/graph.vertices.csv"));
}
