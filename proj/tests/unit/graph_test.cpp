#include <gtest/gtest.h>

#include "scenemerge/graph.hpp"
#include "test_util.hpp"

using namespace scenemerge;
using testutil::id;
using testutil::lvl;

namespace {

LevelGraph chain() {
  return lvl(R"(lvl 1
root r
node r Scene
node a Group
node b Mesh
node c Light
edge r a direct
edge a b direct
edge r c direct
edge c b indirect
)");
}

}  // namespace

TEST(LevelGraph, RootOnlyGraphIsValid) {
  LevelGraph g(id("root"));
  EXPECT_EQ(g.node_count(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_TRUE(validate(g).ok());
}

TEST(LevelGraph, RemoveNodeDropsIncidentEdges) {
  LevelGraph g = chain();
  g.remove_node(id("b"));
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_FALSE(g.has_edge(id("c"), id("b")));
}

TEST(LevelGraph, UnknownNodeThrows) {
  LevelGraph g = chain();
  EXPECT_THROW(g.node(id("zz")), UnknownNodeError);
  EXPECT_THROW(height(g, id("zz")), UnknownNodeError);
}

TEST(LevelGraph, EqualityIgnoresInsertionOrder) {
  LevelGraph x(id("r"));
  x.put_node({id("a"), "Group", {}});
  x.put_node({id("b"), "Group", {}});
  x.put_edge(id("r"), id("a"), Dependency::Direct);
  x.put_edge(id("r"), id("b"), Dependency::Direct);
  LevelGraph y(id("r"));
  y.put_node({id("b"), "Group", {}});
  y.put_edge(id("r"), id("b"), Dependency::Direct);
  y.put_node({id("a"), "Group", {}});
  y.put_edge(id("r"), id("a"), Dependency::Direct);
  EXPECT_EQ(x, y);
}

TEST(PropertyValue, RealsCompareByBits) {
  EXPECT_EQ(PropertyValue(0.5), PropertyValue(0.5));
  EXPECT_NE(PropertyValue(0.0), PropertyValue(-0.0));
  EXPECT_NE(PropertyValue(1.0), PropertyValue(std::int64_t{1}));
}

TEST(Validate, ReportsEachViolationKind) {
  LevelGraph g(id("r"));
  g.put_node({id("a"), "Group", {{"t", NodeRef{id("ghost")}}, {"tex", AssetRef{AssetId("none")}}}});
  g.put_node({id("b"), "Group", {}});
  g.put_node({id("c"), "Group", {}});
  g.put_node({id("lonely"), "Group", {}});
  g.put_edge(id("r"), id("a"), Dependency::Direct);
  g.put_edge(id("a"), id("b"), Dependency::Direct);
  g.put_edge(id("c"), id("b"), Dependency::Direct);
  g.put_edge(id("b"), id("c"), Dependency::Indirect);
  g.put_edge(id("a"), id("a"), Dependency::Indirect);
  g.put_edge(id("b"), id("r"), Dependency::Indirect);
  g.put_edge(id("a"), id("missing"), Dependency::Indirect);
  auto report = validate(g);
  EXPECT_EQ(report.count(ViolationKind::DanglingNodeRef), 1u);
  EXPECT_EQ(report.count(ViolationKind::DanglingAssetRef), 1u);
  EXPECT_EQ(report.count(ViolationKind::MultipleDirectParents), 1u);
  EXPECT_EQ(report.count(ViolationKind::SelfLoop), 1u);
  EXPECT_EQ(report.count(ViolationKind::RootHasParent), 1u);
  EXPECT_EQ(report.count(ViolationKind::DanglingEdge), 1u);
  EXPECT_GE(report.count(ViolationKind::Cycle), 1u);
  EXPECT_EQ(report.count(ViolationKind::Unreachable), 1u);

  LevelGraph no_root;
  no_root.set_root(id("r"));
  EXPECT_EQ(validate(no_root).count(ViolationKind::MissingRoot), 1u);
}

TEST(Scc, ReverseTopologicalWithSortedMembers) {
  LevelGraph g = chain();
  g.put_edge(id("b"), id("a"), Dependency::Indirect);
  auto comps = strongly_connected_components(g);
  ASSERT_EQ(comps.size(), 3u);
  EXPECT_EQ(comps.back(), std::vector<NodeId>{id("r")});
  bool found = false;
  for (const auto& c : comps) found = found || c == std::vector<NodeId>{id("a"), id("b")};
  EXPECT_TRUE(found);
}

TEST(Heights, LongestPathFromRoot) {
  LevelGraph g = chain();
  auto h = heights(g);
  EXPECT_EQ(h.at(id("r")), 0u);
  EXPECT_EQ(h.at(id("a")), 1u);
  EXPECT_EQ(h.at(id("c")), 1u);
  EXPECT_EQ(h.at(id("b")), 2u);
}

TEST(Heights, CycleMembersShareHeight) {
  LevelGraph g = chain();
  g.put_edge(id("b"), id("a"), Dependency::Indirect);
  auto h = heights(g);
  EXPECT_EQ(h.at(id("a")), h.at(id("b")));
}

TEST(Traversal, DirectSubtreeAndReachability) {
  LevelGraph g = chain();
  EXPECT_EQ(direct_subtree(g, id("a")), (std::set<NodeId>{id("a"), id("b")}));
  EXPECT_EQ(direct_subtree(g, id("c")), (std::set<NodeId>{id("c")}));
  EXPECT_EQ(reachable_from_root(g).size(), 4u);
  EXPECT_TRUE(reaches(g, id("r"), id("b")));
  EXPECT_FALSE(reaches(g, id("b"), id("r")));
  EXPECT_FALSE(reaches(g, id("a"), id("a")));
}

TEST(ParentIndexTest, DirectParentLookup) {
  LevelGraph g = chain();
  ParentIndex p(g);
  EXPECT_EQ(p.direct_parent(id("b")), id("a"));
  EXPECT_EQ(p.parents(id("b")).size(), 2u);
  EXPECT_FALSE(p.direct_parent(id("r")).has_value());
}
