#pragma once

#include <stdexcept>
#include <vector>

#include "scenemerge/assets.hpp"
#include "scenemerge/conflict.hpp"
#include "scenemerge/diff.hpp"
#include "scenemerge/graph.hpp"

namespace scenemerge {

struct MergeStats {
  std::size_t ancestor_nodes = 0;
  std::size_t ancestor_edges = 0;
  std::size_t diff_a_nodes = 0;
  std::size_t diff_b_nodes = 0;
  std::size_t merged_nodes = 0;
  std::size_t merged_edges = 0;
  double wall_time_seconds = 0.0;
};

struct MergeOutcome {
  LevelGraph merged;
  std::vector<Conflict> conflicts;
  std::vector<DroppedEdit> dropped;
  std::vector<Edge> removed_cycle_edges;
  MergeStats stats;

  bool has_unresolved() const;
};

/// Raised if the pipeline would emit an invalid level. Indicates a bug.
class MergeInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A survivor that lost an in-edge when `group_root`'s group was deleted.
/// It is linked to the group root's former Direct parent only if it is still
/// disconnected once every branch edit has been applied.
struct PendingRelink {
  NodeId node;
  NodeId group_root;
  Dependency kind = Dependency::Indirect;
  auto operator<=>(const PendingRelink&) const = default;
};

/// Nodes one branch deleted, grouped under the topmost deleted node.
struct DeletionGroup {
  Branch branch = Branch::A;
  NodeId root;
  std::set<NodeId> members;
};

/// Working state threaded through the merge phases.
struct MergeState {
  const LevelGraph* ancestor = nullptr;
  LevelGraph graph;
  std::vector<Conflict> conflicts;
  std::vector<DroppedEdit> dropped;
  std::vector<DeletionGroup> deferred;  // deletions awaiting conflict resolution
  std::vector<PendingRelink> relinks;

  explicit MergeState(const LevelGraph& anc) : ancestor(&anc), graph(anc) {}
};

/// Inserts nodes added by either branch. Same-id additions merge key by key;
/// differing values raise AddAddConflict and differing parents raise
/// ReparentConflict. A node with no parent present hangs off the root.
void apply_additions(MergeState& state, const DiffResult& a, const DiffResult& b);

/// Removes deleted groups that the other branch did not touch; a group the
/// other branch edited or referenced becomes a DeleteModify conflict and
/// stays in place until resolution.
void apply_deletions(MergeState& state, const DiffResult& a, const DiffResult& b);

/// Merges property and in-edge edits of surviving nodes.
void apply_modifications(MergeState& state, const DiffResult& a, const DiffResult& b,
                         const MergePolicy& policy);

/// Applies the preferred branch's side of every unresolved graph conflict and
/// records the losing side as dropped. Manual policy leaves conflicts open.
void resolve_conflicts(MergeState& state, const DiffResult& a, const DiffResult& b,
                       const MergePolicy& policy);

struct CycleRepair {
  LevelGraph graph;
  std::vector<Edge> removed;  // in removal order
};

/// Breaks every cycle by repeatedly removing one in-cycle edge: Indirect
/// edges first, lowest source height next, then (parent, child) order.
CycleRepair repair_cycles(LevelGraph graph);

/// Links pending relinks and any other node unreachable from the root.
/// Never creates a cycle. Returns the edges added.
std::vector<Edge> reconnect(LevelGraph& graph, const LevelGraph& ancestor,
                            const std::vector<PendingRelink>& relinks);

/// 3-way merge of two edited versions against their common ancestor.
MergeOutcome merge3(const LevelGraph& ancestor, const LevelGraph& mine, const LevelGraph& theirs,
                    const MergePolicy& policy, const AssetContext* assets = nullptr);

}  // namespace scenemerge
