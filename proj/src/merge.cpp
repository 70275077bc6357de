#include "scenemerge/merge.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace scenemerge {

bool MergeOutcome::has_unresolved() const {
  return std::any_of(conflicts.begin(), conflicts.end(),
                     [](const Conflict& c) { return c.resolution == Resolution::Unresolved; });
}

namespace {

// nullopt: key untouched; inner nullopt: key removed.
using Outcome = std::optional<std::optional<PropertyValue>>;

Outcome outcome(const NodeDelta* d, const std::string& key) {
  if (d == nullptr) return std::nullopt;
  if (auto it = d->property_sets.find(key); it != d->property_sets.end()) {
    return std::optional<PropertyValue>(it->second);
  }
  if (d->property_removals.contains(key)) return std::optional<PropertyValue>();
  return std::nullopt;
}

const NodeDelta* intrinsic_delta(const DiffResult& d, const NodeId& id) {
  return d.is_intrinsic(id) ? d.delta(id) : nullptr;
}

const NodeDelta* added_delta(const DiffResult& d, const NodeId& id) {
  return d.class_of(id) == ChangeClass::Added ? d.delta(id) : nullptr;
}

const DiffResult& diff_of(Branch b, const DiffResult& a, const DiffResult& bb) {
  return b == Branch::A ? a : bb;
}

std::optional<NodeId> direct_parent_in(const LevelGraph& g, const NodeId& id) {
  for (const auto& [key, dep] : g.edges()) {
    if (key.second == id && dep == Dependency::Direct) return key.first;
  }
  return std::nullopt;
}

void set_property(LevelGraph& g, const NodeId& id, const std::string& key,
                  const std::optional<PropertyValue>& value) {
  auto& props = g.node(id).properties;
  if (value) {
    props.insert_or_assign(key, *value);
  } else {
    props.erase(key);
  }
}

void set_direct_parent(LevelGraph& g, const NodeId& id, const std::optional<NodeId>& parent) {
  auto current = direct_parent_in(g, id);
  if (current == parent) return;
  if (current) g.remove_edge(*current, id);
  if (parent && g.has_node(*parent) && *parent != id) g.put_edge(*parent, id, Dependency::Direct);
}

// Indirect in-edge membership is binary, so concurrent edits never clash:
// removals and additions of both branches are applied as a union.
void apply_indirect(LevelGraph& g, const NodeId& id, const NodeDelta* da, const NodeDelta* db) {
  for (const NodeDelta* d : {da, db}) {
    if (d == nullptr) continue;
    for (const auto& p : d->indirect_removed) {
      // An Indirect edge promoted to Direct shows up as a removal; if the
      // promotion itself lost a conflict the edge must stay as it was.
      if (d->reparent && d->reparent->new_parent == p) continue;
      if (g.edge(p, id) == Dependency::Indirect) g.remove_edge(p, id);
    }
  }
  for (const NodeDelta* d : {da, db}) {
    if (d == nullptr) continue;
    for (const auto& p : d->indirect_added) {
      if (p != id && g.has_node(p) && !g.has_edge(p, id)) g.put_edge(p, id, Dependency::Indirect);
    }
  }
}

std::optional<NodeId> new_parent_of(const NodeDelta* d) {
  if (d == nullptr || !d->reparent) return std::nullopt;
  return d->reparent->new_parent;
}

std::optional<PropertyValue> ancestor_value(const LevelGraph& anc, const NodeId& id,
                                            const std::string& key) {
  const Node* n = anc.find_node(id);
  if (n == nullptr) return std::nullopt;
  auto it = n->properties.find(key);
  if (it == n->properties.end()) return std::nullopt;
  return it->second;
}

bool resolves_in(const LevelGraph& g, const PropertyValue& v) {
  if (v.is_node_ref()) return g.has_node(v.as_node_ref());
  if (v.is_asset_ref()) return g.assets().contains(v.as_asset_ref());
  return true;
}

DroppedEdit dropped_property(Branch br, const NodeId& node, const std::string& key,
                             const std::optional<PropertyValue>& value, std::string reason) {
  DroppedEdit d;
  d.branch = br;
  d.edit = value ? EditKind::SetProperty : EditKind::RemoveProperty;
  d.subject = node.str();
  d.key = key;
  d.value = value;
  d.reason = std::move(reason);
  return d;
}

DroppedEdit dropped_structural(Branch br, EditKind kind, const NodeId& node,
                               std::optional<NodeId> parent, std::optional<Dependency> dep,
                               std::string reason) {
  DroppedEdit d;
  d.branch = br;
  d.edit = kind;
  d.subject = node.str();
  d.parent = std::move(parent);
  d.dependency = dep;
  d.reason = std::move(reason);
  return d;
}

std::string preference_reason(Branch winner) {
  return "conflict resolved in favor of branch " + std::string(to_string(winner));
}

std::vector<DeletionGroup> deletion_groups(Branch br, const DiffResult& diff,
                                           const LevelGraph& ancestor, const ParentIndex& parents) {
  std::map<NodeId, DeletionGroup> groups;
  for (const auto& [id, cls] : diff.classes) {
    if (cls != ChangeClass::Deleted) continue;
    NodeId top = id;
    // Climb Direct parents while they are deleted too; bounded by node count
    // because the ancestor is acyclic.
    for (auto p = parents.direct_parent(top); p && diff.class_of(*p) == ChangeClass::Deleted;
         p = parents.direct_parent(top)) {
      top = *p;
    }
    auto& g = groups[top];
    g.branch = br;
    g.root = top;
    g.members.insert(id);
  }
  (void)ancestor;
  std::vector<DeletionGroup> out;
  out.reserve(groups.size());
  for (auto& [root, g] : groups) out.push_back(std::move(g));
  return out;
}

// Nodes whose edits in `other` hit a group: edits of members, new edges out
// of members, and node references to members.
std::vector<NodeId> implicated_by(const std::set<NodeId>& members, const DiffResult& other) {
  std::set<NodeId> out;
  for (const auto& [id, delta] : other.deltas) {
    if (members.contains(id) && other.is_intrinsic(id)) out.insert(id);
    for (const auto& [key, value] : delta.property_sets) {
      if (value.is_node_ref() && members.contains(value.as_node_ref())) out.insert(id);
    }
  }
  for (const auto& e : other.added_edges) {
    if (members.contains(e.parent)) out.insert(e.child);
  }
  return {out.begin(), out.end()};
}

// Removes the groups' members plus nodes added under them along Direct
// edges. Survivors that lose an in-edge are queued for relinking. Returns
// the removed node set.
std::set<NodeId> remove_groups(MergeState& st, const std::vector<const DeletionGroup*>& groups) {
  std::map<NodeId, NodeId> root_of;
  for (const auto* g : groups) {
    for (const auto& m : g->members) {
      if (st.graph.has_node(m)) root_of.emplace(m, g->root);
    }
  }
  std::vector<NodeId> todo;
  for (const auto& [m, r] : root_of) todo.push_back(m);
  while (!todo.empty()) {
    NodeId v = std::move(todo.back());
    todo.pop_back();
    const NodeId root = root_of.at(v);
    for (const auto& e : st.graph.out_edges(v)) {
      if (e.dependency != Dependency::Direct || st.ancestor->has_node(e.child)) continue;
      if (root_of.emplace(e.child, root).second) todo.push_back(e.child);
    }
  }
  for (const auto& [v, root] : root_of) {
    for (const auto& e : st.graph.out_edges(v)) {
      if (!root_of.contains(e.child)) st.relinks.push_back({e.child, root, e.dependency});
    }
  }
  std::set<NodeId> removed;
  for (const auto& [v, root] : root_of) {
    st.graph.remove_node(v);
    removed.insert(v);
  }
  return removed;
}

void drop_fragments(std::vector<DroppedEdit>& out, Branch br, const NodeId& id,
                    const NodeDelta& d, const std::string& reason) {
  for (const auto& [key, value] : d.property_sets) out.push_back(dropped_property(br, id, key, value, reason));
  for (const auto& key : d.property_removals) out.push_back(dropped_property(br, id, key, std::nullopt, reason));
  if (d.reparent) {
    out.push_back(dropped_structural(br, EditKind::Reparent, id, d.reparent->new_parent,
                                     Dependency::Direct, reason));
  }
  for (const auto& p : d.indirect_added) {
    out.push_back(dropped_structural(br, EditKind::AddEdge, id, p, Dependency::Indirect, reason));
  }
  for (const auto& p : d.indirect_removed) {
    out.push_back(dropped_structural(br, EditKind::RemoveEdge, id, p, Dependency::Indirect, reason));
  }
}

}  // namespace

void apply_additions(MergeState& st, const DiffResult& a, const DiffResult& b) {
  std::set<NodeId> ids;
  for (const DiffResult* d : {&a, &b}) {
    for (const auto& [id, cls] : d->classes) {
      if (cls == ChangeClass::Added) ids.insert(id);
    }
  }

  for (const auto& id : ids) {
    const NodeDelta* da = added_delta(a, id);
    const NodeDelta* db = added_delta(b, id);
    Node node{id, da != nullptr ? da->kind : db->kind, {}};
    if (da != nullptr && db != nullptr) {
      std::set<std::string> keys;
      for (const auto& [k, v] : da->property_sets) keys.insert(k);
      for (const auto& [k, v] : db->property_sets) keys.insert(k);
      for (const auto& k : keys) {
        auto ia = da->property_sets.find(k);
        auto ib = db->property_sets.find(k);
        if (ia == da->property_sets.end()) {
          node.properties.emplace(k, ib->second);
        } else if (ib == db->property_sets.end() || ia->second == ib->second) {
          node.properties.emplace(k, ia->second);
        } else {
          st.conflicts.push_back({AddAddConflict{id, k, ia->second, ib->second}});
        }
      }
    } else {
      node.properties = (da != nullptr ? da : db)->property_sets;
    }
    st.graph.put_node(std::move(node));
  }

  // Edges once every added node exists, since parents may be added too.
  for (const auto& id : ids) {
    const NodeDelta* da = added_delta(a, id);
    const NodeDelta* db = added_delta(b, id);
    std::optional<NodeId> direct;
    bool contested = false;
    if (da != nullptr && db != nullptr && new_parent_of(da) != new_parent_of(db)) {
      st.conflicts.push_back({ReparentConflict{id, new_parent_of(da), new_parent_of(db)}});
      contested = true;
    } else {
      direct = new_parent_of(da != nullptr ? da : db);
    }
    bool linked = false;
    if (direct) {
      const NodeId& parent = st.graph.has_node(*direct) ? *direct : st.graph.root();
      st.graph.put_edge(parent, id, Dependency::Direct);
      linked = true;
    }
    for (const NodeDelta* d : {da, db}) {
      if (d == nullptr) continue;
      for (const auto& p : d->indirect_added) {
        if (p == id || (direct && p == *direct) || !st.graph.has_node(p)) continue;
        if (!st.graph.has_edge(p, id)) st.graph.put_edge(p, id, Dependency::Indirect);
        linked = true;
      }
    }
    if (!linked && !contested) st.graph.put_edge(st.graph.root(), id, Dependency::Direct);
  }
}

void apply_deletions(MergeState& st, const DiffResult& a, const DiffResult& b) {
  ParentIndex parents(*st.ancestor);
  std::vector<DeletionGroup> groups = deletion_groups(Branch::A, a, *st.ancestor, parents);
  for (auto& g : deletion_groups(Branch::B, b, *st.ancestor, parents)) groups.push_back(std::move(g));

  std::vector<const DeletionGroup*> clean;
  std::vector<DeletionGroup> deferred;
  for (auto& g : groups) {
    const DiffResult& other = g.branch == Branch::A ? b : a;
    auto implicated = implicated_by(g.members, other);
    if (implicated.empty()) {
      clean.push_back(&g);
    } else {
      st.conflicts.push_back({DeleteModifyConflict{g.branch, g.root, std::move(implicated)}});
      deferred.push_back(g);
    }
  }
  remove_groups(st, clean);
  for (auto& g : deferred) st.deferred.push_back(std::move(g));
}

void apply_modifications(MergeState& st, const DiffResult& a, const DiffResult& b,
                         const MergePolicy& policy) {
  std::set<NodeId> ids;
  for (const DiffResult* d : {&a, &b}) {
    for (const auto& [id, delta] : d->deltas) {
      if (d->is_intrinsic(id)) ids.insert(id);
    }
  }

  for (const auto& id : ids) {
    if (!st.graph.has_node(id)) continue;
    const NodeDelta* da = intrinsic_delta(a, id);
    const NodeDelta* db = intrinsic_delta(b, id);

    std::set<std::string> keys;
    for (const NodeDelta* d : {da, db}) {
      if (d == nullptr) continue;
      for (const auto& [k, v] : d->property_sets) keys.insert(k);
      keys.insert(d->property_removals.begin(), d->property_removals.end());
    }
    const std::string kind = st.graph.node(id).kind;
    for (const auto& key : keys) {
      Outcome oa = outcome(da, key);
      Outcome ob = outcome(db, key);
      if (oa && ob && *oa != *ob) {
        const bool averageable = policy.numeric_averaging && policy.averageable_kinds.contains(kind) &&
                                 *oa && *ob && (*oa)->is_real() && (*ob)->is_real();
        if (averageable) {
          const double x = (*oa)->as_real();
          const double y = (*ob)->as_real();
          double mean = (x + y) / 2.0;
          if (!std::isfinite(mean)) mean = x / 2.0 + y / 2.0;
          set_property(st.graph, id, key, PropertyValue(mean));
        } else {
          st.conflicts.push_back(
              {PropertyConflict{id, key, *oa, *ob, ancestor_value(*st.ancestor, id, key)}});
        }
        continue;
      }
      set_property(st.graph, id, key, oa ? *oa : *ob);
    }

    const bool ra = da != nullptr && da->reparent.has_value();
    const bool rb = db != nullptr && db->reparent.has_value();
    if (ra && rb && *da->reparent != *db->reparent) {
      st.conflicts.push_back({ReparentConflict{id, da->reparent->new_parent, db->reparent->new_parent}});
    } else if (ra || rb) {
      set_direct_parent(st.graph, id, (ra ? da : db)->reparent->new_parent);
    }
    apply_indirect(st.graph, id, da, db);
  }
}

void resolve_conflicts(MergeState& st, const DiffResult& a, const DiffResult& b,
                       const MergePolicy& policy) {
  const auto winner = policy.preferred();
  if (!winner) return;
  const Branch w = *winner;
  const Branch l = other(w);
  const std::string reason = preference_reason(w);

  struct WinningDeletion {
    const DeletionGroup* group;
    const DeleteModifyConflict* conflict;
  };
  std::vector<WinningDeletion> deletions;

  for (auto& c : st.conflicts) {
    if (c.resolution != Resolution::Unresolved) continue;
    if (std::holds_alternative<AssetConflict>(c.detail)) continue;
    c.resolution = took(w);

    if (auto* pc = std::get_if<PropertyConflict>(&c.detail)) {
      const auto& win = w == Branch::A ? pc->value_a : pc->value_b;
      const auto& lose = w == Branch::A ? pc->value_b : pc->value_a;
      if (st.graph.has_node(pc->node)) set_property(st.graph, pc->node, pc->key, win);
      st.dropped.push_back(dropped_property(l, pc->node, pc->key, lose, reason));
    } else if (auto* ac = std::get_if<AddAddConflict>(&c.detail)) {
      const auto& win = w == Branch::A ? ac->value_a : ac->value_b;
      const auto& lose = w == Branch::A ? ac->value_b : ac->value_a;
      if (st.graph.has_node(ac->node)) set_property(st.graph, ac->node, ac->key, win);
      st.dropped.push_back(dropped_property(l, ac->node, ac->key, lose, reason));
    } else if (auto* rc = std::get_if<ReparentConflict>(&c.detail)) {
      const auto& win = w == Branch::A ? rc->parent_a : rc->parent_b;
      const auto& lose = w == Branch::A ? rc->parent_b : rc->parent_a;
      if (st.graph.has_node(rc->node)) {
        set_direct_parent(st.graph, rc->node, win);
        const bool added = a.class_of(rc->node) == ChangeClass::Added ||
                           b.class_of(rc->node) == ChangeClass::Added;
        auto pick = [&](const DiffResult& d) {
          return added ? added_delta(d, rc->node) : intrinsic_delta(d, rc->node);
        };
        apply_indirect(st.graph, rc->node, pick(a), pick(b));
      }
      st.dropped.push_back(
          dropped_structural(l, EditKind::Reparent, rc->node, lose, Dependency::Direct, reason));
    } else if (auto* dm = std::get_if<DeleteModifyConflict>(&c.detail)) {
      auto it = std::find_if(st.deferred.begin(), st.deferred.end(), [&](const DeletionGroup& g) {
        return g.branch == dm->deleting_branch && g.root == dm->deleted_node;
      });
      if (dm->deleting_branch == w) {
        if (it != st.deferred.end()) deletions.push_back({&*it, dm});
      } else {
        st.dropped.push_back(dropped_structural(dm->deleting_branch, EditKind::DeleteNode,
                                                dm->deleted_node, std::nullopt, std::nullopt, reason));
      }
    }
  }

  if (deletions.empty()) return;
  std::vector<const DeletionGroup*> groups;
  for (const auto& d : deletions) groups.push_back(d.group);
  const std::set<NodeId> removed = remove_groups(st, groups);

  // Record what the losing branch loses with the deleted groups.
  const DiffResult& lost = diff_of(l, a, b);
  std::set<NodeId> reported;
  for (const auto& d : deletions) {
    for (const auto& m : d.conflict->modified_nodes) {
      if (!reported.insert(m).second) continue;
      const NodeDelta* delta = lost.delta(m);
      if (delta == nullptr) continue;
      const ChangeClass cls = lost.class_of(m);
      if (removed.contains(m)) {
        if (cls == ChangeClass::Added) {
          st.dropped.push_back(dropped_structural(l, EditKind::AddNode, m, std::nullopt, std::nullopt, reason));
        } else if (delta->intrinsic) {
          drop_fragments(st.dropped, l, m, *delta, reason);
        }
        continue;
      }
      // Survivor: only the parts pointing into the removed nodes are lost.
      if (delta->reparent && delta->reparent->new_parent && removed.contains(*delta->reparent->new_parent)) {
        st.dropped.push_back(dropped_structural(l, EditKind::Reparent, m, delta->reparent->new_parent,
                                                Dependency::Direct, reason));
      }
      for (const auto& e : lost.added_edges) {
        if (e.child != m || !removed.contains(e.parent)) continue;
        if (e.dependency == Dependency::Direct && delta->reparent) continue;
        st.dropped.push_back(dropped_structural(l, EditKind::AddEdge, m, e.parent, e.dependency, reason));
      }
      for (const auto& [key, value] : delta->property_sets) {
        if (!value.is_node_ref() || !removed.contains(value.as_node_ref())) continue;
        auto fallback = ancestor_value(*st.ancestor, m, key);
        if (fallback && !resolves_in(st.graph, *fallback)) fallback.reset();
        set_property(st.graph, m, key, fallback);
        st.dropped.push_back(dropped_property(l, m, key, value, reason));
      }
    }
  }
  for (const auto& v : removed) {
    if (lost.class_of(v) == ChangeClass::Added && !reported.contains(v)) {
      st.dropped.push_back(dropped_structural(l, EditKind::AddNode, v, std::nullopt, std::nullopt, reason));
    }
  }
}

CycleRepair repair_cycles(LevelGraph graph) {
  CycleRepair out;
  for (;;) {
    std::vector<std::vector<NodeId>> cyclic;
    for (auto& comp : strongly_connected_components(graph)) {
      if (comp.size() > 1 || graph.has_edge(comp.front(), comp.front())) cyclic.push_back(std::move(comp));
    }
    if (cyclic.empty()) break;

    const auto h = heights(graph);
    const auto* pick = &cyclic.front();
    for (const auto& comp : cyclic) {
      auto key = std::pair(h.at(comp.front()), comp.front());
      auto best = std::pair(h.at(pick->front()), pick->front());
      if (key < best) pick = &comp;
    }
    const std::set<NodeId> members(pick->begin(), pick->end());

    std::optional<Edge> chosen;
    auto better = [&](const Edge& e) {
      if (!chosen) return true;
      if (e.dependency != chosen->dependency) return e.dependency == Dependency::Indirect;
      return std::tuple(h.at(e.parent), e.parent, e.child) <
             std::tuple(h.at(chosen->parent), chosen->parent, chosen->child);
    };
    for (const auto& m : members) {
      for (const auto& e : graph.out_edges(m)) {
        if (members.contains(e.child) && better(e)) chosen = e;
      }
    }
    graph.remove_edge(chosen->parent, chosen->child);
    out.removed.push_back(*chosen);
  }
  out.graph = std::move(graph);
  return out;
}

std::vector<Edge> reconnect(LevelGraph& graph, const LevelGraph& ancestor,
                            const std::vector<PendingRelink>& relinks) {
  std::vector<Edge> added;
  std::set<NodeId> reach = reachable_from_root(graph);
  if (reach.size() == graph.node_count()) return added;

  auto mark = [&](const NodeId& from) {
    std::vector<NodeId> todo{from};
    reach.insert(from);
    while (!todo.empty()) {
      NodeId v = std::move(todo.back());
      todo.pop_back();
      for (const auto& e : graph.out_edges(v)) {
        if (reach.insert(e.child).second) todo.push_back(e.child);
      }
    }
  };
  auto link = [&](const NodeId& parent, const NodeId& child, Dependency dep) {
    graph.put_edge(parent, child, dep);
    added.push_back({parent, child, dep});
    mark(child);
  };

  const auto h = heights(graph);
  ParentIndex anc_parents(ancestor);

  std::vector<PendingRelink> order;
  for (const auto& r : relinks) {
    if (graph.has_node(r.node)) order.push_back(r);
  }
  std::sort(order.begin(), order.end(), [&](const PendingRelink& x, const PendingRelink& y) {
    return std::tuple(h.at(x.node), x.node, x.group_root, x.kind) <
           std::tuple(h.at(y.node), y.node, y.group_root, y.kind);
  });
  for (const auto& r : order) {
    if (reach.contains(r.node)) continue;
    std::optional<NodeId> target = anc_parents.direct_parent(r.group_root);
    while (target && !graph.has_node(*target)) target = anc_parents.direct_parent(*target);
    NodeId parent = target.value_or(graph.root());
    if (!reach.contains(parent) || reaches(graph, r.node, parent)) parent = graph.root();
    Dependency dep = r.kind;
    if (dep == Dependency::Direct && direct_parent_in(graph, r.node)) dep = Dependency::Indirect;
    link(parent, r.node, dep);
  }

  std::vector<NodeId> orphans;
  for (const auto& [id, node] : graph.nodes()) {
    if (!reach.contains(id)) orphans.push_back(id);
  }
  std::sort(orphans.begin(), orphans.end(), [&](const NodeId& x, const NodeId& y) {
    return std::pair(h.at(x), x) < std::pair(h.at(y), y);
  });
  for (const auto& id : orphans) {
    if (!reach.contains(id)) link(graph.root(), id, Dependency::Indirect);
  }
  return added;
}

namespace {

void check_kinds(const LevelGraph& x, const LevelGraph& y, const char* xn, const char* yn) {
  for (const auto& [id, node] : x.nodes()) {
    const Node* other = y.find_node(id);
    if (other != nullptr && other->kind != node.kind) {
      throw IncompatibleInputError("node '" + id.str() + "' has kind '" + node.kind + "' in " + xn +
                                   " but '" + other->kind + "' in " + yn);
    }
  }
}

// Reverts references that no longer resolve (deleted nodes, dropped assets).
void sanitize_references(MergeState& st, const DiffResult& a, const DiffResult& b) {
  std::vector<std::pair<NodeId, std::string>> broken;
  for (const auto& [id, node] : st.graph.nodes()) {
    for (const auto& [key, value] : node.properties) {
      if (!resolves_in(st.graph, value)) broken.emplace_back(id, key);
    }
  }
  for (const auto& [id, key] : broken) {
    const PropertyValue current = st.graph.node(id).properties.at(key);
    for (Branch br : {Branch::A, Branch::B}) {
      const NodeDelta* d = diff_of(br, a, b).delta(id);
      if (d == nullptr) continue;
      auto it = d->property_sets.find(key);
      if (it != d->property_sets.end() && it->second == current) {
        st.dropped.push_back(dropped_property(br, id, key, current, "referenced item no longer exists"));
      }
    }
    auto fallback = ancestor_value(*st.ancestor, id, key);
    if (fallback && !resolves_in(st.graph, *fallback)) fallback.reset();
    set_property(st.graph, id, key, fallback);
  }
}

}  // namespace

MergeOutcome merge3(const LevelGraph& ancestor, const LevelGraph& mine, const LevelGraph& theirs,
                    const MergePolicy& policy, const AssetContext* assets) {
  const auto start = std::chrono::steady_clock::now();

  require_valid(ancestor, "ancestor");
  require_valid(mine, "mine");
  require_valid(theirs, "theirs");
  if (mine.root() != ancestor.root() || theirs.root() != ancestor.root()) {
    throw IncompatibleInputError("root mismatch: inputs are not versions of the same level");
  }
  check_kinds(ancestor, mine, "ancestor", "mine");
  check_kinds(ancestor, theirs, "ancestor", "theirs");
  check_kinds(mine, theirs, "mine", "theirs");

  const DiffResult diff_a = classify(ancestor, mine);
  const DiffResult diff_b = classify(ancestor, theirs);

  MergeState st(ancestor);
  apply_additions(st, diff_a, diff_b);
  apply_deletions(st, diff_a, diff_b);
  apply_modifications(st, diff_a, diff_b, policy);

  auto manifest = merge_manifests(ancestor.assets(), mine.assets(), theirs.assets(), assets, policy);
  st.graph.assets() = std::move(manifest.merged);
  for (auto& c : manifest.conflicts) st.conflicts.push_back(std::move(c));
  for (auto& d : manifest.dropped) st.dropped.push_back(std::move(d));

  resolve_conflicts(st, diff_a, diff_b, policy);
  sanitize_references(st, diff_a, diff_b);

  CycleRepair repaired = repair_cycles(std::move(st.graph));
  st.graph = std::move(repaired.graph);
  for (const auto& e : repaired.removed) {
    for (Branch br : {Branch::A, Branch::B}) {
      if (diff_of(br, diff_a, diff_b).added_edges.contains(e)) {
        st.dropped.push_back(dropped_structural(br, EditKind::AddEdge, e.child, e.parent, e.dependency,
                                                "removed to break a cycle"));
      }
    }
  }
  reconnect(st.graph, ancestor, st.relinks);

  auto report = validate(st.graph);
  if (!report.ok()) {
    throw MergeInvariantError("merge produced an invalid level: " + report.violations.front().message);
  }

  MergeOutcome out;
  out.merged = std::move(st.graph);
  out.conflicts = std::move(st.conflicts);
  out.dropped = std::move(st.dropped);
  out.removed_cycle_edges = std::move(repaired.removed);
  out.stats.ancestor_nodes = ancestor.node_count();
  out.stats.ancestor_edges = ancestor.edge_count();
  out.stats.diff_a_nodes = diff_stats(diff_a).total_edited;
  out.stats.diff_b_nodes = diff_stats(diff_b).total_edited;
  out.stats.merged_nodes = out.merged.node_count();
  out.stats.merged_edges = out.merged.edge_count();
  out.stats.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace scenemerge
