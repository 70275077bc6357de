#include "scenemerge/diff.hpp"

#include <algorithm>
#include <iterator>

namespace scenemerge {

std::string_view to_string(ChangeClass c) {
  switch (c) {
    case ChangeClass::Unchanged:
      return "unchanged";
    case ChangeClass::Added:
      return "added";
    case ChangeClass::Deleted:
      return "deleted";
    case ChangeClass::Modified:
      return "modified";
  }
  return "unknown";
}

ChangeClass DiffResult::class_of(const NodeId& id) const {
  auto it = classes.find(id);
  return it == classes.end() ? ChangeClass::Unchanged : it->second;
}

const NodeDelta* DiffResult::delta(const NodeId& id) const {
  auto it = deltas.find(id);
  return it == deltas.end() ? nullptr : &it->second;
}

bool DiffResult::is_intrinsic(const NodeId& id) const {
  const NodeDelta* d = delta(id);
  return d != nullptr && d->intrinsic && class_of(id) == ChangeClass::Modified;
}

namespace {

std::string summarize(const ValidationReport& report) {
  std::string out;
  for (const auto& v : report.violations) {
    if (!out.empty()) out += "; ";
    out += v.message;
  }
  return out;
}

}  // namespace

InvalidGraphError::InvalidGraphError(std::string what_graph, ValidationReport report)
    : std::runtime_error(what_graph + " is not a valid level: " + summarize(report)),
      report_(std::move(report)) {}

void require_valid(const LevelGraph& graph, const std::string& label) {
  auto report = validate(graph);
  if (!report.ok()) throw InvalidGraphError(label, std::move(report));
}

namespace {

struct InEdges {
  std::optional<NodeId> direct;
  std::set<NodeId> indirect;
};

InEdges in_edges_of(const ParentIndex& index, const NodeId& id, const LevelGraph* keep_only) {
  InEdges out;
  for (const auto& [parent, dep] : index.parents(id)) {
    if (keep_only != nullptr && !keep_only->has_node(parent)) continue;
    if (dep == Dependency::Direct) {
      out.direct = parent;
    } else {
      out.indirect.insert(parent);
    }
  }
  return out;
}

}  // namespace

DiffResult classify(const LevelGraph& ancestor, const LevelGraph& version) {
  require_valid(ancestor, "ancestor");
  require_valid(version, "version");
  if (ancestor.root() != version.root()) {
    throw IncompatibleInputError("root mismatch: '" + ancestor.root().str() + "' vs '" +
                                 version.root().str() + "' are not versions of the same level");
  }

  DiffResult diff;
  diff.root = version.root();
  ParentIndex anc_parents(ancestor);
  ParentIndex ver_parents(version);

  for (const auto& [id, node] : ancestor.nodes()) {
    if (!version.has_node(id)) diff.classes.emplace(id, ChangeClass::Deleted);
  }

  for (const auto& [id, node] : version.nodes()) {
    const Node* before = ancestor.find_node(id);
    if (before == nullptr) {
      NodeDelta delta;
      delta.kind = node.kind;
      delta.property_sets = node.properties;
      InEdges in = in_edges_of(ver_parents, id, nullptr);
      if (in.direct) delta.reparent = Reparent{in.direct};
      delta.indirect_added = std::move(in.indirect);
      delta.intrinsic = true;
      diff.classes.emplace(id, ChangeClass::Added);
      diff.deltas.emplace(id, std::move(delta));
      continue;
    }
    if (before->kind != node.kind) {
      throw IncompatibleInputError("node '" + id.str() + "' changes kind from '" + before->kind +
                                   "' to '" + node.kind + "'");
    }

    NodeDelta delta;
    for (const auto& [key, value] : node.properties) {
      auto it = before->properties.find(key);
      if (it == before->properties.end() || !(it->second == value)) {
        delta.property_sets.emplace(key, value);
      }
    }
    for (const auto& [key, value] : before->properties) {
      if (!node.properties.contains(key)) delta.property_removals.insert(key);
    }

    // Ancestor in-edges whose parent no longer exists are a consequence of
    // the parent's deletion, not an edit of this node.
    InEdges was = in_edges_of(anc_parents, id, &version);
    InEdges now = in_edges_of(ver_parents, id, nullptr);
    if (was.direct != now.direct) delta.reparent = Reparent{now.direct};
    std::set_difference(now.indirect.begin(), now.indirect.end(), was.indirect.begin(),
                        was.indirect.end(),
                        std::inserter(delta.indirect_added, delta.indirect_added.end()));
    std::set_difference(was.indirect.begin(), was.indirect.end(), now.indirect.begin(),
                        now.indirect.end(),
                        std::inserter(delta.indirect_removed, delta.indirect_removed.end()));
    for (const auto& [parent, dep] : ver_parents.parents(id)) {
      auto old = ancestor.edge(parent, id);
      if (old && *old != dep) delta.dependency_kind_changes.insert({parent, dep});
    }

    if (delta.empty()) {
      diff.classes.emplace(id, ChangeClass::Unchanged);
    } else {
      delta.intrinsic = true;
      diff.classes.emplace(id, ChangeClass::Modified);
      diff.deltas.emplace(id, std::move(delta));
    }
  }

  // Direct dependents mirror their parents' edits, transitively.
  std::vector<NodeId> todo;
  for (const auto& [id, cls] : diff.classes) {
    if (cls == ChangeClass::Modified) todo.push_back(id);
  }
  while (!todo.empty()) {
    NodeId v = std::move(todo.back());
    todo.pop_back();
    for (const auto& e : version.out_edges(v)) {
      if (e.dependency != Dependency::Direct) continue;
      auto& cls = diff.classes.at(e.child);
      if (cls != ChangeClass::Unchanged) continue;
      cls = ChangeClass::Modified;
      diff.deltas.emplace(e.child, NodeDelta{});
      todo.push_back(e.child);
    }
  }

  const auto& anc_edges = ancestor.edges();
  const auto& ver_edges = version.edges();
  for (const auto& [key, dep] : ver_edges) {
    auto it = anc_edges.find(key);
    if (it == anc_edges.end() || it->second != dep) diff.added_edges.insert({key.first, key.second, dep});
  }
  for (const auto& [key, dep] : anc_edges) {
    auto it = ver_edges.find(key);
    if (it == ver_edges.end() || it->second != dep) diff.removed_edges.insert({key.first, key.second, dep});
  }
  return diff;
}

LevelGraph induced_diff_graph(const LevelGraph& version, const DiffResult& diff) {
  if (diff.root != version.root()) {
    throw IncompatibleInputError("diff was computed for root '" + diff.root.str() +
                                 "', graph has root '" + version.root().str() + "'");
  }
  LevelGraph sub;
  sub.set_root(version.root());
  for (const auto& [id, cls] : diff.classes) {
    if (cls != ChangeClass::Added && cls != ChangeClass::Modified) continue;
    const Node* node = version.find_node(id);
    if (node == nullptr) {
      throw IncompatibleInputError("diff marks '" + id.str() + "' as " +
                                   std::string(to_string(cls)) + " but the graph lacks it");
    }
    sub.put_node(*node);
  }
  for (const auto& [id, node] : version.nodes()) {
    if (!diff.classes.contains(id)) {
      throw IncompatibleInputError("graph node '" + id.str() + "' is not classified by the diff");
    }
  }
  for (const auto& [key, dep] : version.edges()) {
    if (sub.has_node(key.first) && sub.has_node(key.second)) sub.put_edge(key.first, key.second, dep);
  }
  return sub;
}

DiffStats diff_stats(const DiffResult& diff) {
  DiffStats s;
  for (const auto& [id, cls] : diff.classes) {
    switch (cls) {
      case ChangeClass::Added:
        ++s.added;
        break;
      case ChangeClass::Deleted:
        ++s.deleted;
        break;
      case ChangeClass::Modified:
        if (diff.is_intrinsic(id)) {
          ++s.modified_intrinsic;
        } else {
          ++s.modified_propagated;
        }
        break;
      case ChangeClass::Unchanged:
        break;
    }
  }
  s.total_edited = s.added + s.deleted + s.modified_intrinsic + s.modified_propagated;
  return s;
}

}  // namespace scenemerge
