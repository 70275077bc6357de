#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "scenemerge/conflict.hpp"
#include "scenemerge/graph.hpp"
#include "scenemerge/merge.hpp"

namespace scenemerge::sim {

struct AddNode {
  NodeId id;
  std::string kind;
  NodeId parent;
  PropertyMap properties;
};
struct DeleteNode {
  NodeId id;
};
struct SetProperty {
  NodeId id;
  std::string key;
  PropertyValue value;
};
struct RemoveProperty {
  NodeId id;
  std::string key;
};
/// Moves the Direct in-edge of `id`; an empty parent leaves it hanging on
/// its Indirect parents only.
struct Reparent {
  NodeId id;
  std::optional<NodeId> new_parent;
};
struct ChangeDepKind {
  NodeId parent;
  NodeId child;
  Dependency kind = Dependency::Indirect;
};
struct AddIndirectEdge {
  NodeId parent;
  NodeId child;
};
struct RemoveIndirectEdge {
  NodeId parent;
  NodeId child;
};

using EditOp = std::variant<AddNode, DeleteNode, SetProperty, RemoveProperty, Reparent, ChangeDepKind,
                            AddIndirectEdge, RemoveIndirectEdge>;

std::string describe(const EditOp& op);

/// Raised by apply_script; `index` is the position of the offending op.
class ScriptError : public std::runtime_error {
 public:
  ScriptError(std::size_t index, const std::string& message);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Applies one op in place. Throws std::invalid_argument when the op does
/// not fit the graph. Does not validate the result.
///
/// DeleteNode removes the node's Direct subtree, erases node references into
/// it, and relinks survivors left unreachable to the deleted node's Direct
/// parent (root if it had none), keeping the severed edge's kind.
/// Returns the ids the op read or wrote.
std::set<NodeId> apply_op(LevelGraph& graph, const EditOp& op);

struct TracedResult {
  LevelGraph graph;
  std::set<NodeId> touched;
};

/// Applies and validates op by op.
TracedResult apply_script_traced(const LevelGraph& graph, const std::vector<EditOp>& script);
LevelGraph apply_script(const LevelGraph& graph, const std::vector<EditOp>& script);

struct OpMix {
  double add = 3;
  double remove_node = 2;
  double set = 4;
  double remove_property = 1;
  double reparent = 2;
  double change_kind = 1;
  double add_indirect = 2;
  double remove_indirect = 1;
};

struct SizeParams {
  std::size_t nodes = 10;
  std::size_t edges = 12;
  std::size_t ops_a = 2;
  std::size_t ops_b = 2;
  OpMix mix;
  // Added ids are drawn from a pool shared by both branches with this
  // probability, so that same-id additions occur.
  double shared_add_ratio = 0.3;
  std::size_t assets = 2;
};

struct Scenario {
  std::uint64_t seed = 0;
  LevelGraph base;
  std::vector<EditOp> script_a;
  std::vector<EditOp> script_b;
  MergePolicy policy;
};

/// Deterministic in (seed, params). Throws std::invalid_argument when the
/// node and edge counts cannot form a valid level.
Scenario generate(std::uint64_t seed, const SizeParams& params);

/// Dimensions of a large benchmark scenario. Edits are leaf additions, leaf
/// deletions and property sets on nodes without Direct children, so each
/// edit changes exactly one node and the diff sizes are exact.
struct ScaleTarget {
  std::string name;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t adds_a = 0, deletes_a = 0, sets_a = 0;
  std::size_t adds_b = 0, deletes_b = 0, sets_b = 0;
  std::size_t merged_nodes = 0;
  std::size_t merged_edges = 0;

  std::size_t diff_a() const { return adds_a + deletes_a + sets_a; }
  std::size_t diff_b() const { return adds_b + deletes_b + sets_b; }
};

/// room, planets, lab, vikings.
const std::vector<ScaleTarget>& scale_presets();
const ScaleTarget& scale_preset(const std::string& name);
Scenario generate_scale(std::uint64_t seed, const ScaleTarget& target);

/// Optional independent conflict check. Returns a description of the
/// mismatch, or nullopt when it agrees (or cannot judge) the outcome.
using ConflictOracle =
    std::function<std::optional<std::string>(const Scenario&, const MergeOutcome& manual_outcome)>;

struct Verdict {
  std::vector<std::string> violations;
  std::size_t conflicts = 0;
  bool disjoint = false;         // the disjoint-edit law applied
  bool oracle_checked = false;
  bool pass() const { return violations.empty(); }
};

Verdict check_scenario(const Scenario& scenario, const ConflictOracle& oracle = {});

}  // namespace scenemerge::sim
