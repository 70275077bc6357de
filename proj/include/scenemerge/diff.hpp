#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenemerge/graph.hpp"

namespace scenemerge {

enum class ChangeClass { Unchanged, Added, Deleted, Modified };

std::string_view to_string(ChangeClass c);

/// New Direct parent of a node; an empty optional means the node lost its
/// Direct parent and hangs only on Indirect edges.
struct Reparent {
  std::optional<NodeId> new_parent;
  bool operator==(const Reparent&) const = default;
};

struct KindChange {
  NodeId parent;
  Dependency new_kind;
  auto operator<=>(const KindChange&) const = default;
};

/// Per-node edit relative to the ancestor. Edges are anchored at their child:
/// a change to the in-edges of a node is a modification of that node.
struct NodeDelta {
  std::string kind;  // set for Added nodes only
  PropertyMap property_sets;
  std::set<std::string> property_removals;
  std::optional<Reparent> reparent;
  std::set<NodeId> indirect_added;
  std::set<NodeId> indirect_removed;
  // Edges present in both versions whose kind flipped. Informational; the
  // structural effect is already carried by reparent and indirect_*.
  std::set<KindChange> dependency_kind_changes;
  bool intrinsic = false;

  bool touches_structure() const {
    return reparent.has_value() || !indirect_added.empty() || !indirect_removed.empty();
  }
  bool empty() const {
    return property_sets.empty() && property_removals.empty() && !touches_structure() &&
           dependency_kind_changes.empty();
  }
  bool operator==(const NodeDelta&) const = default;
};

struct DiffResult {
  NodeId root;
  std::map<NodeId, ChangeClass> classes;
  std::map<NodeId, NodeDelta> deltas;  // Added and Modified nodes
  std::set<Edge> added_edges;
  std::set<Edge> removed_edges;

  ChangeClass class_of(const NodeId& id) const;
  const NodeDelta* delta(const NodeId& id) const;
  bool is_intrinsic(const NodeId& id) const;

  bool operator==(const DiffResult&) const = default;
};

/// Thrown when diff or merge inputs cannot describe versions of one level.
class IncompatibleInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an input graph fails validation.
class InvalidGraphError : public std::runtime_error {
 public:
  InvalidGraphError(std::string what_graph, ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Throws InvalidGraphError naming `label` if `graph` is not a valid level.
void require_valid(const LevelGraph& graph, const std::string& label);

/// Classifies every node of ancestor and version. In-edges removed only
/// because their parent was deleted are not counted as edits of the child.
/// Modification propagates transitively along Direct edges of `version`.
DiffResult classify(const LevelGraph& ancestor, const LevelGraph& version);

/// Subgraph of `version` induced by its Added and Modified nodes.
LevelGraph induced_diff_graph(const LevelGraph& version, const DiffResult& diff);

struct DiffStats {
  std::size_t added = 0;
  std::size_t deleted = 0;
  std::size_t modified_intrinsic = 0;
  std::size_t modified_propagated = 0;
  std::size_t total_edited = 0;

  bool operator==(const DiffStats&) const = default;
};

DiffStats diff_stats(const DiffResult& diff);

}  // namespace scenemerge
