#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scenemerge/conflict.hpp"
#include "scenemerge/graph.hpp"
#include "scenemerge/sim.hpp"

namespace oracle {

/// Conflicts expected when branch A applies `a` and branch B applies `b` to
/// `base`, judged rule by rule on the two ops (Manual policy, no
/// averaging). Each conflict is a signature string:
///   "property <node> <key>", "reparent <node>", "add-add <node> <key>",
///   "delete-modify <branch> <deleted node>".
std::set<std::string> expected_conflicts(const scenemerge::LevelGraph& base,
                                         const std::optional<scenemerge::sim::EditOp>& a,
                                         const std::optional<scenemerge::sim::EditOp>& b);

/// Same signatures for conflicts reported by a merge (asset conflicts are
/// outside the oracle's scope and skipped).
std::set<std::string> signatures(const std::vector<scenemerge::Conflict>& conflicts);

}  // namespace oracle
