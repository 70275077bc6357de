#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "scenemerge/graph.hpp"

namespace scenemerge {

enum class Branch { A, B };

inline Branch other(Branch b) { return b == Branch::A ? Branch::B : Branch::A; }
std::string_view to_string(Branch b);

enum class ResolutionPolicy { Manual, PreferA, PreferB };

std::string_view to_string(ResolutionPolicy p);
std::optional<ResolutionPolicy> parse_policy(std::string_view text);

struct MergePolicy {
  ResolutionPolicy resolution = ResolutionPolicy::Manual;
  // Concurrent edits of one real-valued property resolve to the mean when
  // the node's kind is listed in averageable_kinds.
  bool numeric_averaging = false;
  std::set<std::string> averageable_kinds;

  std::optional<Branch> preferred() const {
    switch (resolution) {
      case ResolutionPolicy::PreferA:
        return Branch::A;
      case ResolutionPolicy::PreferB:
        return Branch::B;
      default:
        return std::nullopt;
    }
  }
};

enum class Resolution { Unresolved, TookA, TookB };

std::string_view to_string(Resolution r);
inline Resolution took(Branch b) { return b == Branch::A ? Resolution::TookA : Resolution::TookB; }

// An absent optional value means the property is missing (removed).
struct PropertyConflict {
  NodeId node;
  std::string key;
  std::optional<PropertyValue> value_a;
  std::optional<PropertyValue> value_b;
  std::optional<PropertyValue> ancestor;
  bool operator==(const PropertyConflict&) const = default;
};

struct DeleteModifyConflict {
  Branch deleting_branch;
  NodeId deleted_node;                // root of the deleted group
  std::vector<NodeId> modified_nodes;  // other branch's nodes whose edits hit the group
  bool operator==(const DeleteModifyConflict&) const = default;
};

struct ReparentConflict {
  NodeId node;
  std::optional<NodeId> parent_a;
  std::optional<NodeId> parent_b;
  bool operator==(const ReparentConflict&) const = default;
};

struct AddAddConflict {
  NodeId node;
  std::string key;
  PropertyValue value_a;
  PropertyValue value_b;
  bool operator==(const AddAddConflict&) const = default;
};

struct AssetConflict {
  AssetId asset;
  std::optional<AssetEntry> entry_a;
  std::optional<AssetEntry> entry_b;
  std::optional<AssetEntry> ancestor;
  bool operator==(const AssetConflict&) const = default;
};

struct Conflict {
  using Detail = std::variant<PropertyConflict, DeleteModifyConflict, ReparentConflict,
                              AddAddConflict, AssetConflict>;
  Detail detail;
  Resolution resolution = Resolution::Unresolved;

  std::string_view kind_name() const;
  bool operator==(const Conflict&) const = default;
};

enum class EditKind {
  SetProperty,
  RemoveProperty,
  AddNode,
  DeleteNode,
  Reparent,
  AddEdge,
  RemoveEdge,
  AssetChange,
};

std::string_view to_string(EditKind k);

/// A branch edit that did not make it into the merged level.
struct DroppedEdit {
  Branch branch = Branch::A;
  EditKind edit = EditKind::SetProperty;
  std::string subject;  // node id, or asset id for AssetChange
  std::optional<std::string> key;
  std::optional<PropertyValue> value;
  std::optional<NodeId> parent;  // Reparent target, or edge parent
  std::optional<Dependency> dependency;
  std::optional<AssetEntry> asset;  // rejected entry; empty = deletion
  std::string reason;

  bool operator==(const DroppedEdit&) const = default;
};

}  // namespace scenemerge
