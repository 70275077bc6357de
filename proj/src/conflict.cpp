#include "scenemerge/conflict.hpp"

namespace scenemerge {

std::string_view to_string(Branch b) { return b == Branch::A ? "a" : "b"; }

std::string_view to_string(ResolutionPolicy p) {
  switch (p) {
    case ResolutionPolicy::Manual:
      return "manual";
    case ResolutionPolicy::PreferA:
      return "prefer-a";
    case ResolutionPolicy::PreferB:
      return "prefer-b";
  }
  return "manual";
}

std::optional<ResolutionPolicy> parse_policy(std::string_view text) {
  if (text == "manual") return ResolutionPolicy::Manual;
  if (text == "prefer-a") return ResolutionPolicy::PreferA;
  if (text == "prefer-b") return ResolutionPolicy::PreferB;
  return std::nullopt;
}

std::string_view to_string(Resolution r) {
  switch (r) {
    case Resolution::Unresolved:
      return "unresolved";
    case Resolution::TookA:
      return "took-a";
    case Resolution::TookB:
      return "took-b";
  }
  return "unresolved";
}

std::string_view Conflict::kind_name() const {
  switch (detail.index()) {
    case 0:
      return "property";
    case 1:
      return "delete-modify";
    case 2:
      return "reparent";
    case 3:
      return "add-add";
    default:
      return "asset";
  }
}

std::string_view to_string(EditKind k) {
  switch (k) {
    case EditKind::SetProperty:
      return "set-property";
    case EditKind::RemoveProperty:
      return "remove-property";
    case EditKind::AddNode:
      return "add-node";
    case EditKind::DeleteNode:
      return "delete-node";
    case EditKind::Reparent:
      return "reparent";
    case EditKind::AddEdge:
      return "add-edge";
    case EditKind::RemoveEdge:
      return "remove-edge";
    case EditKind::AssetChange:
      return "asset-change";
  }
  return "unknown";
}

}  // namespace scenemerge
