#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "scenemerge/format.hpp"
#include "scenemerge/merge.hpp"
#include "test_util.hpp"

using namespace scenemerge;
using testutil::id;

namespace {

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ParseError parse_error(const std::string& text) {
  try {
    parse_level(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "expected a parse error for:\n" << text;
  return ParseError(0, 0, "");
}

}  // namespace

TEST(Format, RootOnlyDocument) {
  auto doc = parse_level("lvl 1\nroot r\nnode r Scene\n");
  EXPECT_EQ(doc.format_version, 1);
  EXPECT_EQ(doc.graph.node_count(), 1u);
  EXPECT_EQ(serialize_level(doc), "lvl 1\nroot r\nnode r Scene\n");
}

TEST(Format, SampleLevelHasExpectedShape) {
  auto g = testutil::load_fixture("crates.lvl");
  EXPECT_EQ(g.node_count(), 9u);
  EXPECT_EQ(g.node(id("spawner")).kind, "Script");
  EXPECT_EQ(g.edge(id("spawner"), id("crate")), Dependency::Indirect);
  EXPECT_EQ(g.node(id("spawner")).properties.at("max_instances"), PropertyValue(std::int64_t{8}));
  EXPECT_EQ(g.node(id("crate_mesh")).properties.at("material"), PropertyValue(NodeRef{id("crate_material")}));
  EXPECT_TRUE(validate(g).ok());
}

TEST(Format, CanonicalTextIsAFixedPoint) {
  std::string canonical = read_all(testutil::fixture("crates.lvl"));
  EXPECT_EQ(serialize_level(parse_level(canonical)), canonical);
}

TEST(Format, MessyInputCanonicalizes) {
  auto messy = testutil::load_fixture("crates_messy.lvl");
  EXPECT_EQ(serialize_level(messy), read_all(testutil::fixture("crates.lvl")));
}

TEST(Format, RealsUseShortestRoundTrip) {
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(60.0), "60");
  EXPECT_EQ(format_real(-2.5), "-2.5");
  EXPECT_EQ(format_real(1e300), "1e+300");
  double third = 1.0 / 3.0;
  auto doc = parse_level("lvl 1\nroot r\nnode r Scene\n  x real " + format_real(third) + "\n");
  EXPECT_EQ(doc.graph.node(id("r")).properties.at("x"), PropertyValue(third));
}

TEST(Format, QuotingRoundTrips) {
  EXPECT_EQ(quote_token("plain_id-1.2"), "plain_id-1.2");
  EXPECT_EQ(quote_token("two words"), "\"two words\"");
  EXPECT_EQ(quote_token(""), "\"\"");
  LevelGraph g(NodeId("the root"));
  g.node(g.root()).properties["note"] = std::string("say \"hi\"\\\nbye\t#");
  EXPECT_EQ(parse_level(serialize_level(g)).graph, g);
}

TEST(Format, AssetsAndAssetRefs) {
  auto g = testutil::lvl(R"(lvl 1
root r
node r Scene
  texture asset tex/stone.png
asset tex/stone.png texture sha256:abc
)");
  EXPECT_EQ(g.assets().at(AssetId("tex/stone.png")).type_tag, "texture");
  EXPECT_TRUE(g.node(id("r")).properties.at("texture").is_asset_ref());
  EXPECT_EQ(parse_level(serialize_level(g)).graph, g);
}

TEST(Format, DuplicateIdNamesBothLines) {
  auto e = parse_error("lvl 1\nroot r\nnode r Scene\nnode x Mesh\nnode x Mesh\n");
  EXPECT_EQ(e.line(), 5u);
  EXPECT_EQ(e.column(), 6u);
  EXPECT_NE(e.detail().find("lines 4"), std::string::npos) << e.what();
  EXPECT_NE(e.detail().find("5"), std::string::npos);
}

TEST(Format, DiagnosticsArePositioned) {
  EXPECT_EQ(parse_error("").line(), 1u);
  EXPECT_EQ(parse_error("lvl 2\n").column(), 5u);
  EXPECT_EQ(parse_error("lvl 1\nroot r\nnode r Scene\n  color text red\n").column(), 14u);
  EXPECT_EQ(parse_error("lvl 1\nroot r\nnode r Scene\n  x real nan\n").line(), 4u);
  EXPECT_EQ(parse_error("lvl 1\nroot r\nnode r Scene\n  x int 1.5\n").column(), 9u);
  EXPECT_EQ(parse_error("lvl 1\nroot r\nnode r Scene\n  t ref ghost\n").line(), 4u);
  EXPECT_EQ(parse_error("lvl 1\nroot r\nnode r Scene\nedge r ghost direct\n").line(), 4u);
  EXPECT_EQ(parse_error("lvl 1\nroot r\nnode r Scene\nedge r r direct\n").line(), 4u);
  EXPECT_EQ(parse_error("lvl 1\nroot r\nnode r Scene\nnode a G\nnode b G\nedge r b direct\nedge a b direct\n"
                        "edge r a direct\n")
                .line(),
            6u);
  EXPECT_EQ(parse_error("lvl 1\nroot r\nnode r Scene\nnode \"open Mesh\n").line(), 4u);
  EXPECT_EQ(parse_error("lvl 1\nnode r Scene\n").detail(), "missing root declaration");
  EXPECT_EQ(parse_error("lvl 1\nroot r\nnode r Scene\nwidget r\n").column(), 1u);
}

TEST(Format, CyclesParseButDoNotValidate) {
  auto g = testutil::load_fixture("cyclic.lvl");
  EXPECT_FALSE(validate(g).ok());
}

TEST(Format, LoadPrefixesPath) {
  try {
    load_level(testutil::fixture("does_not_exist.lvl"));
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("does_not_exist.lvl"), std::string::npos);
  }
}

TEST(Report, RoundTripsThroughParser) {
  auto base = testutil::load_fixture("space_ancestor.lvl");
  auto a = testutil::load_fixture("space_a.lvl");
  auto b = testutil::load_fixture("space_b.lvl");
  MergePolicy p;
  p.resolution = ResolutionPolicy::PreferA;
  auto outcome = merge3(base, a, b, p);
  auto text = serialize_report(outcome, {ResolutionPolicy::PreferA, "Ada Lovelace", "#ff8800"});
  auto report = parse_report(text);
  EXPECT_EQ(report.summary.at("policy"), "prefer-a");
  EXPECT_EQ(report.summary.at("user.name"), "\"Ada Lovelace\"");
  EXPECT_EQ(report.summary.at("conflicts"), "1");
  EXPECT_EQ(report.summary.at("unresolved"), "0");
  ASSERT_EQ(report.conflicts.size(), 1u);
  EXPECT_EQ(report.conflicts[0].at("kind"), "delete-modify");
  EXPECT_EQ(report.conflicts[0].at("resolution"), "took-a");
  ASSERT_EQ(report.dropped.size(), 1u);
  EXPECT_EQ(report.dropped[0].at("branch"), "b");
}

TEST(Report, RemovedEdgesAndErrors) {
  MergeOutcome o{LevelGraph(id("r")), {}, {}, {}, {}};
  o.removed_cycle_edges.push_back({id("x"), id("y"), Dependency::Indirect});
  auto report = parse_report(serialize_report(o));
  ASSERT_EQ(report.removed_edges.size(), 1u);
  EXPECT_EQ(report.removed_edges[0], (Edge{id("x"), id("y"), Dependency::Indirect}));
  EXPECT_THROW(parse_report(""), ParseError);
  EXPECT_THROW(parse_report("lvlreport 1\nbogus 3\n"), ParseError);
}
