#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace scenemerge {

/// Identity of a node across versions of a level. Never empty.
struct NodeId {
  std::string token;

  NodeId() = default;
  explicit NodeId(std::string t) : token(std::move(t)) {}

  const std::string& str() const { return token; }
  auto operator<=>(const NodeId&) const = default;
};

/// Path-like identity of an asset blob in a level's manifest.
struct AssetId {
  std::string token;

  AssetId() = default;
  explicit AssetId(std::string t) : token(std::move(t)) {}

  const std::string& str() const { return token; }
  auto operator<=>(const AssetId&) const = default;
};

struct NodeRef {
  NodeId target;
  auto operator<=>(const NodeRef&) const = default;
};

struct AssetRef {
  AssetId target;
  auto operator<=>(const AssetRef&) const = default;
};

/// Single-valued node property. Reals compare by bit pattern so that
/// equality agrees with the canonical text form (0.0 and -0.0 differ).
class PropertyValue {
 public:
  using Storage = std::variant<bool, std::int64_t, double, std::string, NodeRef, AssetRef>;

  PropertyValue() : value_(false) {}
  PropertyValue(bool v) : value_(v) {}
  PropertyValue(std::int64_t v) : value_(v) {}
  PropertyValue(int v) : value_(static_cast<std::int64_t>(v)) {}
  PropertyValue(double v) : value_(v) {}
  PropertyValue(std::string v) : value_(std::move(v)) {}
  PropertyValue(const char* v) : value_(std::string(v)) {}
  PropertyValue(NodeRef v) : value_(std::move(v)) {}
  PropertyValue(AssetRef v) : value_(std::move(v)) {}

  const Storage& storage() const { return value_; }

  bool is_bool() const { return std::holds_alternative<bool>(value_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(value_); }
  bool is_real() const { return std::holds_alternative<double>(value_); }
  bool is_text() const { return std::holds_alternative<std::string>(value_); }
  bool is_node_ref() const { return std::holds_alternative<NodeRef>(value_); }
  bool is_asset_ref() const { return std::holds_alternative<AssetRef>(value_); }

  bool as_bool() const { return std::get<bool>(value_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(value_); }
  double as_real() const { return std::get<double>(value_); }
  const std::string& as_text() const { return std::get<std::string>(value_); }
  const NodeId& as_node_ref() const { return std::get<NodeRef>(value_).target; }
  const AssetId& as_asset_ref() const { return std::get<AssetRef>(value_).target; }

  /// Type tag as written in level documents ("bool", "int", "real", ...).
  std::string_view type_name() const;

  friend bool operator==(const PropertyValue& a, const PropertyValue& b);

 private:
  Storage value_;
};

using PropertyMap = std::map<std::string, PropertyValue>;

struct Node {
  NodeId id;
  std::string kind;
  PropertyMap properties;

  bool operator==(const Node&) const = default;
};

enum class Dependency { Direct, Indirect };

std::string_view to_string(Dependency dep);

struct Edge {
  NodeId parent;
  NodeId child;
  Dependency dependency = Dependency::Direct;

  auto operator<=>(const Edge&) const = default;
};

/// Manifest entry: the level only stores the type tag and content digest.
struct AssetEntry {
  std::string type_tag;
  std::string digest;

  auto operator<=>(const AssetEntry&) const = default;
};

using AssetManifest = std::map<AssetId, AssetEntry>;

/// Raised when a query names a node the graph does not contain.
class UnknownNodeError : public std::out_of_range {
 public:
  explicit UnknownNodeError(const NodeId& id);
  const NodeId& id() const { return id_; }

 private:
  NodeId id_;
};

/// A level: labeled graph of nodes with Direct/Indirect dependency edges.
///
/// The container itself admits any shape (cycles, orphans, dangling edges)
/// so that intermediate merge states can be represented; `validate` reports
/// which level invariants hold. Nodes, edges and manifest entries are kept
/// in ordered maps, so equality is canonical regardless of build order.
class LevelGraph {
 public:
  using EdgeKey = std::pair<NodeId, NodeId>;
  using EdgeMap = std::map<EdgeKey, Dependency>;

  LevelGraph() = default;
  explicit LevelGraph(NodeId root, std::string root_kind = "Scene");

  const NodeId& root() const { return root_; }
  void set_root(NodeId root) { root_ = std::move(root); }

  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  const EdgeMap& edges() const { return edges_; }
  const AssetManifest& assets() const { return assets_; }
  AssetManifest& assets() { return assets_; }

  bool has_node(const NodeId& id) const { return nodes_.contains(id); }
  const Node& node(const NodeId& id) const;
  Node& node(const NodeId& id);
  const Node* find_node(const NodeId& id) const;

  /// Inserts or replaces a node.
  void put_node(Node node);
  /// Removes a node together with every incident edge.
  void remove_node(const NodeId& id);

  std::optional<Dependency> edge(const NodeId& parent, const NodeId& child) const;
  bool has_edge(const NodeId& parent, const NodeId& child) const {
    return edges_.contains({parent, child});
  }
  /// Inserts or overwrites the edge for (parent, child).
  void put_edge(const NodeId& parent, const NodeId& child, Dependency dep);
  void remove_edge(const NodeId& parent, const NodeId& child);

  std::vector<Edge> edge_list() const;
  /// Out-edges of `parent` in child order.
  std::vector<Edge> out_edges(const NodeId& parent) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool operator==(const LevelGraph&) const = default;

 private:
  NodeId root_;
  std::map<NodeId, Node> nodes_;
  EdgeMap edges_;
  AssetManifest assets_;
};

/// In-edge view of a graph: for every node its parents keyed by id.
/// Built once per query batch; the graph must outlive it.
class ParentIndex {
 public:
  explicit ParentIndex(const LevelGraph& graph);

  const std::map<NodeId, Dependency>& parents(const NodeId& child) const;
  std::optional<NodeId> direct_parent(const NodeId& child) const;

 private:
  std::map<NodeId, std::map<NodeId, Dependency>> parents_;
  std::map<NodeId, Dependency> empty_;
};

enum class ViolationKind {
  MissingRoot,
  RootHasParent,
  DanglingEdge,
  SelfLoop,
  DanglingNodeRef,
  DanglingAssetRef,
  MultipleDirectParents,
  Cycle,
  Unreachable,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::vector<std::string> subjects;  // node ids, or "parent->child" for edges
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationKind kind) const;
};

/// Reports every violated level invariant. Never throws.
ValidationReport validate(const LevelGraph& graph);

/// Strongly connected components in a deterministic order (reverse
/// topological order of the condensation, members sorted by id).
std::vector<std::vector<NodeId>> strongly_connected_components(const LevelGraph& graph);

/// Longest-path distance from the root, computed on the condensation so that
/// members of a cycle share their component's height. Nodes not reachable
/// from the root are measured from the sources of their own region.
std::map<NodeId, std::size_t> heights(const LevelGraph& graph);

/// Height of a single node. Throws UnknownNodeError for ids not in `graph`.
std::size_t height(const LevelGraph& graph, const NodeId& id);

/// Nodes reachable from `id` through Direct edges only, `id` included.
std::set<NodeId> direct_subtree(const LevelGraph& graph, const NodeId& id);

/// Nodes reachable from the root through edges of either kind.
std::set<NodeId> reachable_from_root(const LevelGraph& graph);

/// True if a path of one or more edges leads from `from` to `to`.
bool reaches(const LevelGraph& graph, const NodeId& from, const NodeId& to);

}  // namespace scenemerge
